// Command-line front-end: construction, analysis, training, evaluation, and
// figure-data export. Every subcommand writes its resolved configuration next
// to its outputs so runs can be reproduced exactly.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sdbm/constructor.hpp"
#include "sdbm/data.hpp"
#include "sdbm/evaluation.hpp"
#include "sdbm/free_energy.hpp"
#include "sdbm/mixtures.hpp"
#include "sdbm/model.hpp"
#include "sdbm/model_io.hpp"
#include "sdbm/threads.hpp"
#include "sdbm/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sdbm;

namespace {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Global {
    std::string output_dir = ".";
    int threads = 0;
    std::uint64_t seed = 0;
};

void add_global(CLI::App* cmd, Global& g) {
    cmd->add_option("--output_dir", g.output_dir, "directory for all outputs");
    cmd->add_option("--threads", g.threads, "worker thread cap (0 = hardware)");
    cmd->add_option("--seed", g.seed, "master random seed");
}

fs::path prepare_output(const Global& g) {
    fs::path dir(g.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + g.output_dir);
    if (g.threads > 0) set_num_threads(g.threads);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    f << text;
}

void write_config(const fs::path& dir, const std::string& name, json cfg, const Global& g) {
    cfg["output_dir"] = g.output_dir;
    cfg["threads"] = g.threads;
    cfg["seed"] = g.seed;
    write_text(dir / (name + "_config.json"), cfg.dump(1) + "\n");
}

Model read_model(const std::string& path) {
    if (!fs::exists(path)) throw IoError("model file not found: " + path);
    return load_model(path);
}

Mat read_examples(const std::string& path) {
    if (!fs::exists(path)) throw IoError("data file not found: " + path);
    const std::string ext = fs::path(path).extension().string();
    if (ext == ".silb") return load_silb(path);
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path);
    return import_csv(f);
}

std::vector<double> to_std(const Vec& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

// ---------------------------------------------------------------- construct

struct ConstructArgs {
    Global g;
    int gbm = 0;
    std::string bundle;  // MxL
    std::vector<int> rbm, dbm, sdbm;
    std::string init = "zeros";  // zeros | gaussian:sigma
    double beta = 1.0;
};

int run_construct(const ConstructArgs& a) {
    const fs::path dir = prepare_output(a.g);
    std::optional<Model> model;
    if (a.gbm > 0) {
        model = gbm_model(a.gbm);
    } else if (!a.bundle.empty()) {
        int m = 0, l = 0;
        if (std::sscanf(a.bundle.c_str(), "%dx%d", &m, &l) != 2)
            throw std::invalid_argument("--bundle expects MxL, e.g. 2x2");
        model = bundle_sdbm(m, l);
    } else {
        NetworkSpec spec;
        if (a.rbm.size() == 2)
            spec = NetworkSpec::rbm(a.rbm[0], a.rbm[1]);
        else if (a.dbm.size() >= 2)
            spec = NetworkSpec::dbm(a.dbm);
        else if (a.sdbm.size() >= 2)
            spec = NetworkSpec::sdbm(a.sdbm);
        else
            throw std::invalid_argument("choose one of --gbm/--bundle/--rbm/--dbm/--sdbm");
        if (a.init == "zeros") {
            model = Model::zeros(spec);
        } else {
            double sigma = 0.0;
            if (std::sscanf(a.init.c_str(), "gaussian:%lf", &sigma) != 1 || !(sigma >= 0.0))
                throw std::invalid_argument("--init expects zeros or gaussian:SIGMA");
            Rng rng(a.g.seed);
            model = Model::gaussian(spec, sigma, rng);
        }
    }
    if (a.beta != 1.0) model = rescale(*model, a.beta);
    save_model(*model, (dir / "model.json").string());

    const auto& spec = model->spec();
    std::cout << "layers:";
    for (int n : spec.layer_sizes) std::cout << " " << n;
    std::cout << "\npairs: " << spec.mask.size() << "\n";
    for (std::size_t q = 0; q < spec.mask.size(); ++q) {
        auto [k, l] = spec.mask[q];
        const Mat& w = model->params().weights[q];
        std::cout << "w[" << k << "," << l << "] " << w.rows() << "x" << w.cols()
                  << " max|w|=" << w.cwiseAbs().maxCoeff() << "\n";
    }
    json cfg = {{"gbm", a.gbm},   {"bundle", a.bundle}, {"rbm", a.rbm}, {"dbm", a.dbm},
                {"sdbm", a.sdbm}, {"init", a.init},     {"beta", a.beta}};
    write_config(dir, "construct", cfg, a.g);
    return 0;
}

// ------------------------------------------------------------------ inspect

int run_inspect(const Global& g, const std::string& model_path) {
    const fs::path dir = prepare_output(g);
    const Model m = read_model(model_path);
    json j;
    j["layer_sizes"] = m.spec().layer_sizes;
    switch (m.spec().topology()) {
        case Topology::rbm: j["topology"] = "rbm"; break;
        case Topology::dbm: j["topology"] = "dbm"; break;
        case Topology::sdbm: j["topology"] = "sdbm"; break;
        default: j["topology"] = "general"; break;
    }
    j["num_hidden"] = m.spec().num_hidden();
    j["centered"] = m.params().has_offsets();
    double wmax = 0.0, wsq = 0.0;
    for (const Mat& w : m.params().weights) {
        if (w.size()) wmax = std::max(wmax, w.cwiseAbs().maxCoeff());
        wsq += w.squaredNorm();
    }
    j["weight_max_abs"] = wmax;
    j["weight_frobenius"] = std::sqrt(wsq);
    j["bounds"] = json::parse(bound_report(m).to_json());
    const std::string text = j.dump(1);
    std::cout << text << "\n";
    write_text(dir / "inspect.json", text + "\n");
    write_config(dir, "inspect", {{"model", model_path}}, g);
    return 0;
}

// ------------------------------------------------------------------ regions

int run_regions(const Global& g, const std::string& model_path, const std::string& method,
                int grid_resolution) {
    const fs::path dir = prepare_output(g);
    const Model m = read_model(model_path);
    CountOptions opt;
    opt.seed = g.seed;
    opt.grid_resolution = grid_resolution;
    if (method == "auto")
        opt.method = CountMethod::automatic;
    else if (method == "envelope")
        opt.method = CountMethod::envelope_1d;
    else if (method == "lp")
        opt.method = CountMethod::lp_exact;
    else if (method == "grid")
        opt.method = CountMethod::grid_estimate;
    else
        throw std::invalid_argument("--method must be auto|envelope|lp|grid");
    const RegionReport report = count_effective_mixtures(m, opt);
    write_text(dir / "regions.json", report.to_json(m.spec()) + "\n");
    write_text(dir / "bound_report.json", bound_report(m, report.count).to_json() + "\n");
    std::cout << "count: " << report.count << " (" << report.method
              << (report.exact ? ", exact" : ", lower bound") << ")\n";
    write_config(dir, "regions",
                 {{"model", model_path}, {"method", method}, {"grid_resolution", grid_resolution}},
                 g);
    return 0;
}

// ------------------------------------------------------------------- bounds

int run_bounds(const Global& g, const std::string& model_path, int samples, double range) {
    const fs::path dir = prepare_output(g);
    const Model m = read_model(model_path);
    Rng rng(g.seed);
    json rows = json::array();
    int ok = 0;
    for (int s = 0; s < samples; ++s) {
        Vec v(m.spec().num_visible());
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = (2.0 * rng.uniform() - 1.0) * range;
        const FreeEnergyBundle b = check_bounds(m, v);
        json r;
        r["v"] = to_std(b.v);
        r["F"] = b.exact;
        r["F_hat"] = b.hardmin;
        r["F_mf"] = b.meanfield;
        r["E_res"] = b.residual;
        r["lower"] = b.hardmin - std::exp(b.hardmin - b.residual);
        r["argmin_config"] = config_bitstring(m.spec(), b.argmin_config);
        r["ok"] = b.bounds_ok;
        rows.push_back(std::move(r));
        if (b.bounds_ok) ++ok;
    }
    json out = {{"samples", samples}, {"ok", ok}, {"results", rows}};
    write_text(dir / "bounds.json", out.dump(1) + "\n");
    std::cout << "bounds ok: " << ok << "/" << samples << "\n";
    write_config(dir, "bounds", {{"model", model_path}, {"samples", samples}, {"range", range}},
                 g);
    return ok == samples ? 0 : 3;
}

// ---------------------------------------------------------- export-envelope

int run_export_envelope(const Global& g, const std::string& model_path, int coordinate,
                        double lo, double hi, int resolution, int coordinate2, double lo2,
                        double hi2, int resolution2) {
    const fs::path dir = prepare_output(g);
    const Model m = read_model(model_path);
    std::vector<EnvelopeAxis> axes = {{coordinate, lo, hi, resolution}};
    if (coordinate2 >= 0) axes.push_back({coordinate2, lo2, hi2, resolution2});
    std::ofstream out(dir / "envelope.csv", std::ios::binary);
    if (!out) throw IoError("cannot write envelope.csv");
    if (axes.size() == 1) {
        std::ofstream members(dir / "envelope_members.csv", std::ios::binary);
        if (!members) throw IoError("cannot write envelope_members.csv");
        export_envelope(m, axes, Vec::Zero(m.spec().num_visible()), out, &members);
    } else {
        export_envelope(m, axes, Vec::Zero(m.spec().num_visible()), out);
    }
    std::cout << "envelope.csv written (" << axes.size() << " axis slice)\n";
    write_config(dir, "export-envelope",
                 {{"model", model_path},
                  {"coordinate", coordinate},
                  {"lo", lo},
                  {"hi", hi},
                  {"resolution", resolution},
                  {"coordinate2", coordinate2}},
                 g);
    return 0;
}

// -------------------------------------------------------------------- train

struct TrainArgs {
    Global g;
    std::string preset;  // toy-bas | empty
    std::string model_path;
    std::string data_path;
    std::string test_path;
    double lr = 0.01;
    long updates = 10000;
    int batch = 100;
    int pos_steps = 5;
    int neg_steps = 5;
    double eta = 1.0;
    double reg = 0.0;          // 0 disables
    double center_rate = 0.0;  // 0 disables
    long log_interval = 0;
    double init_sigma = 0.01;
};

struct TrainSetup {
    Model init;
    Mat train, test;
    TrainConfig cfg;
};

TrainSetup resolve_train(const TrainArgs& a) {
    TrainConfig cfg;
    cfg.initial_lr = a.lr;
    cfg.total_updates = a.updates;
    cfg.batch_size = a.batch;
    cfg.pos_chain_steps = a.pos_steps;
    cfg.neg_chain_steps = a.neg_steps;
    cfg.seed = a.g.seed;
    cfg.log_interval = a.log_interval;
    if (a.reg > 0.0) cfg.reg = RegularizationConfig{a.eta, a.reg};
    if (a.center_rate > 0.0) cfg.centering = CenteringConfig{a.center_rate};

    if (a.preset == "toy-bas") {
        const Mat bas = bars_and_stripes(3, 3);
        Rng rng(a.g.seed);
        Model init = Model::gaussian(NetworkSpec::sdbm({9, 6, 6}), a.init_sigma, rng);
        cfg.exact_ll_cap = 21;
        return {std::move(init), bas, bas, cfg};
    }
    if (a.preset == "sdbm-500") {
        // paper-scale preset: visible size comes from the dataset
        if (a.data_path.empty()) throw std::invalid_argument("sdbm-500 preset needs --data");
        Mat train = read_examples(a.data_path);
        Mat test = a.test_path.empty() ? Mat(train.rows(), 0) : read_examples(a.test_path);
        Rng rng(a.g.seed);
        NetworkSpec spec = NetworkSpec::sdbm({static_cast<int>(train.rows()), 500, 500});
        Model init = Model::gaussian(spec, a.init_sigma, rng);
        return {std::move(init), std::move(train), std::move(test), cfg};
    }
    if (!a.preset.empty()) throw std::invalid_argument("unknown preset " + a.preset);
    if (a.model_path.empty() || a.data_path.empty())
        throw std::invalid_argument("train needs --preset or both --model and --data");
    Model init = read_model(a.model_path);
    Mat train = read_examples(a.data_path);
    Mat test = a.test_path.empty() ? Mat(train.rows(), 0) : read_examples(a.test_path);
    return {std::move(init), std::move(train), std::move(test), cfg};
}

json train_args_json(const TrainArgs& a) {
    return {{"preset", a.preset},       {"model", a.model_path},
            {"data", a.data_path},      {"test", a.test_path},
            {"lr", a.lr},               {"updates", a.updates},
            {"batch", a.batch},         {"pos_steps", a.pos_steps},
            {"neg_steps", a.neg_steps}, {"eta", a.eta},
            {"reg", a.reg},             {"center_rate", a.center_rate},
            {"log_interval", a.log_interval}, {"init_sigma", a.init_sigma}};
}

int run_train(const TrainArgs& a) {
    const fs::path dir = prepare_output(a.g);
    TrainSetup setup = resolve_train(a);
    const Mat* test = setup.test.cols() > 0 ? &setup.test : nullptr;
    const TrainResult res = train(setup.init, setup.train, setup.cfg, test);
    save_model(res.model, (dir / "model_trained.json").string());
    std::ostringstream log;
    for (const TrainLogEntry& e : res.log) log << e.to_json() << "\n";
    write_text(dir / "train_log.jsonl", log.str());
    if (!res.log.empty() && res.log.back().exact_test_ll) {
        std::cout << "final exact test ll: " << *res.log.back().exact_test_ll << "\n";
        std::cout << "bernoulli baseline:  " << bernoulli_baseline_ll(setup.train) << "\n";
    } else if (!res.log.empty()) {
        std::cout << "final grad norm: " << res.log.back().grad_norm << "\n";
    }
    write_config(dir, "train", train_args_json(a), a.g);
    return 0;
}

// -------------------------------------------------------------------- sweep

int run_sweep(const TrainArgs& a, int num_configs) {
    const fs::path dir = prepare_output(a.g);
    HyperRanges ranges;
    json results = json::array();
    for (int c = 0; c < num_configs; ++c) {
        TrainArgs cur = a;
        const TrainConfig hp = sample_hyperparams(ranges, a.g.seed * 1000 + c);
        cur.lr = hp.initial_lr;
        cur.reg = hp.reg->base_strength;
        cur.eta = hp.reg->eta;
        cur.center_rate = hp.centering->offset_update_rate;
        TrainSetup setup = resolve_train(cur);
        setup.cfg.seed = hp.seed;
        const Mat* test = setup.test.cols() > 0 ? &setup.test : nullptr;
        const TrainResult res = train(setup.init, setup.train, setup.cfg, test);
        json r = {{"config", c},
                  {"lr", cur.lr},
                  {"reg", cur.reg},
                  {"eta", cur.eta},
                  {"center_rate", cur.center_rate}};
        if (!res.log.empty()) {
            r["final_grad_norm"] = res.log.back().grad_norm;
            r["final_reconstruction_error"] = res.log.back().reconstruction_error;
            if (res.log.back().exact_test_ll) r["exact_test_ll"] = *res.log.back().exact_test_ll;
            if (res.log.back().exact_train_ll)
                r["exact_train_ll"] = *res.log.back().exact_train_ll;
        }
        results.push_back(std::move(r));
        save_model(res.model, (dir / ("sweep_model_" + std::to_string(c) + ".json")).string());
    }
    write_text(dir / "sweep.json", json{{"results", results}}.dump(1) + "\n");
    std::cout << "swept " << num_configs << " configurations\n";
    json cfg = train_args_json(a);
    cfg["num_configs"] = num_configs;
    write_config(dir, "sweep", cfg, a.g);
    return 0;
}

// --------------------------------------------------------------------- eval

int run_eval(const Global& g, const std::string& model_path, const std::string& data_path,
             bool use_exact, int ais_runs, int ais_betas, bool meanfield) {
    const fs::path dir = prepare_output(g);
    const Model m = read_model(model_path);
    json out;
    double log_z;
    if (use_exact) {
        log_z = exact_log_z(m);
        out["log_z_method"] = "exact";
    } else {
        const AISResult ais = ais_log_z(m, AnnealingSchedule::uniform(ais_betas, ais_runs), g.seed);
        log_z = ais.log_z;
        out["log_z_method"] = "ais";
        out["ais"] = {{"runs", ais.num_runs},
                      {"betas", ais.num_betas},
                      {"ci3", {ais.ci3.first, ais.ci3.second}},
                      {"base_log_z", ais.base_log_z}};
    }
    out["log_z"] = log_z;
    if (!data_path.empty()) {
        const Mat data = read_examples(data_path);
        const auto mode = meanfield ? LikelihoodMode::meanfield_bound : LikelihoodMode::exact_f;
        const LikelihoodReport rep = test_log_likelihood(m, data, log_z, mode);
        out["ll_mode"] = meanfield ? "meanfield_bound" : "exact_f";
        out["ll_mean"] = rep.mean;
        out["ll_ci3"] = {rep.ci3.first, rep.ci3.second};
        out["num_examples"] = data.cols();
    }
    write_text(dir / "eval.json", out.dump(1) + "\n");
    std::cout << "log Z = " << log_z << "\n";
    if (out.contains("ll_mean")) std::cout << "mean ll = " << out["ll_mean"].get<double>() << "\n";
    write_config(dir, "eval",
                 {{"model", model_path},
                  {"data", data_path},
                  {"exact", use_exact},
                  {"ais_runs", ais_runs},
                  {"ais_betas", ais_betas},
                  {"meanfield", meanfield}},
                 g);
    return 0;
}

// ------------------------------------------------------------------- sample

int run_sample(const Global& g, const std::string& model_path, int chain_steps, int count,
               const std::string& data_path) {
    const fs::path dir = prepare_output(g);
    const Model m = read_model(model_path);
    Rng rng(g.seed);
    LayerBatch chains;
    for (int n : m.spec().layer_sizes) {
        Mat layer(n, count);
        for (int c = 0; c < count; ++c)
            for (int i = 0; i < n; ++i) layer(i, c) = rng.bernoulli(0.5) ? 1.0 : 0.0;
        chains.push_back(std::move(layer));
    }
    for (int t = 0; t < chain_steps; ++t) gibbs_sweep_batch(m, chains, rng);
    std::ofstream out(dir / "samples.csv", std::ios::binary);
    if (!out) throw IoError("cannot write samples.csv");
    export_csv(chains[0], out);

    if (!data_path.empty()) {
        const Mat data = read_examples(data_path);
        json nn = json::array();
        for (int c = 0; c < count; ++c) {
            Eigen::Index best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (Eigen::Index e = 0; e < data.cols(); ++e) {
                const double d = (data.col(e) - chains[0].col(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = e;
                }
            }
            nn.push_back({{"sample", c},
                          {"nearest_index", best},
                          {"l2_distance", std::sqrt(best_d)}});
        }
        write_text(dir / "neighbors.json", json{{"neighbors", nn}}.dump(1) + "\n");
    }
    std::cout << count << " samples written\n";
    write_config(dir, "sample",
                 {{"model", model_path},
                  {"chain_steps", chain_steps},
                  {"count", count},
                  {"data", data_path}},
                 g);
    return 0;
}

// ------------------------------------------------------------- convert-data

int run_convert(const Global& g, const std::string& input, const std::string& output,
                const std::string& binarize, std::uint64_t binarize_seed, int rows, int cols,
                const std::string& toy) {
    const fs::path dir = prepare_output(g);
    Mat data;
    int out_rows = rows, out_cols = cols;
    if (!toy.empty()) {
        int p1 = 0, p2 = 0;
        if (std::sscanf(toy.c_str(), "bars-and-stripes:%dx%d", &p1, &p2) == 2) {
            data = bars_and_stripes(p1, p2);
            out_rows = p2;
            out_cols = p1;
        } else if (std::sscanf(toy.c_str(), "parity:%d", &p1) == 1) {
            data = parity_patterns(p1);
            out_rows = 1;
            out_cols = p1;
        } else {
            throw std::invalid_argument("--toy expects bars-and-stripes:WxH or parity:N");
        }
    } else {
        if (input.empty()) throw std::invalid_argument("convert-data needs --input or --toy");
        if (!fs::exists(input)) throw IoError("input file not found: " + input);
        const std::string ext = fs::path(input).extension().string();
        if (ext == ".idx" || ext == ".ubyte" || binarize == "stochastic") {
            const IdxData idx = load_idx(input);
            long example_size = 1;
            for (std::size_t d = 1; d < idx.dims.size(); ++d) example_size *= idx.dims[d];
            data = stochastic_binarize(idx.payload, example_size, binarize_seed);
            if (idx.dims.size() == 3) {
                out_rows = static_cast<int>(idx.dims[1]);
                out_cols = static_cast<int>(idx.dims[2]);
            }
        } else if (ext == ".silb") {
            data = load_silb(input);
        } else {
            std::ifstream f(input);
            if (!f) throw IoError("cannot open " + input);
            data = import_csv(f);
        }
    }
    if (out_rows <= 0 || out_cols <= 0) {
        out_rows = 1;
        out_cols = static_cast<int>(data.rows());
    }
    const std::string out_ext = fs::path(output).extension().string();
    const fs::path out_path = dir / output;
    if (out_ext == ".silb")
        save_silb(out_path.string(), data, static_cast<std::uint32_t>(out_rows),
                  static_cast<std::uint32_t>(out_cols));
    else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw IoError("cannot write " + out_path.string());
        export_csv(data, f);
    }
    std::cout << data.cols() << " examples, " << data.rows() << " visible units\n";
    write_config(dir, "convert-data",
                 {{"input", input},
                  {"output", output},
                  {"binarize", binarize},
                  {"binarize_seed", binarize_seed},
                  {"rows", out_rows},
                  {"cols", out_cols},
                  {"toy", toy}},
                 g);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"layered Boltzmann machine toolkit"};
    app.require_subcommand(1);

    ConstructArgs ca;
    auto* construct = app.add_subcommand("construct", "build a model file");
    add_global(construct, ca.g);
    construct->add_option("--gbm", ca.gbm, "single-visible chain model of depth L");
    construct->add_option("--bundle", ca.bundle, "bundle sDBM, MxL");
    construct->add_option("--rbm", ca.rbm, "RBM sizes: n_vis n_hid")->expected(2);
    construct->add_option("--dbm", ca.dbm, "DBM layer sizes");
    construct->add_option("--sdbm", ca.sdbm, "sDBM layer sizes");
    construct->add_option("--init", ca.init, "zeros | gaussian:SIGMA");
    construct->add_option("--beta", ca.beta, "rescale factor");

    Global ig;
    std::string inspect_model;
    auto* inspect = app.add_subcommand("inspect", "summarize a model file");
    add_global(inspect, ig);
    inspect->add_option("--model", inspect_model)->required();

    Global rg;
    std::string regions_model, regions_method = "auto";
    int grid_resolution = 200;
    auto* regions = app.add_subcommand("regions", "count effective mixtures");
    add_global(regions, rg);
    regions->add_option("--model", regions_model)->required();
    regions->add_option("--method", regions_method, "auto|envelope|lp|grid");
    regions->add_option("--grid_resolution", grid_resolution);

    Global bg;
    std::string bounds_model;
    int bounds_samples = 100;
    double bounds_range = 3.0;
    auto* bounds = app.add_subcommand("bounds", "free-energy bound checks");
    add_global(bounds, bg);
    bounds->add_option("--model", bounds_model)->required();
    bounds->add_option("--samples", bounds_samples);
    bounds->add_option("--range", bounds_range, "visible inputs drawn from [-range, range]");

    Global eg;
    std::string env_model;
    int env_coord = 0, env_res = 500, env_coord2 = -1, env_res2 = 100;
    double env_lo = -1.0, env_hi = 4.0, env_lo2 = -1.0, env_hi2 = 4.0;
    auto* envelope = app.add_subcommand("export-envelope", "free-energy slice CSV");
    add_global(envelope, eg);
    envelope->add_option("--model", env_model)->required();
    envelope->add_option("--coordinate", env_coord);
    envelope->add_option("--lo", env_lo);
    envelope->add_option("--hi", env_hi);
    envelope->add_option("--resolution", env_res);
    envelope->add_option("--coordinate2", env_coord2, "second axis (-1 = 1-D slice)");
    envelope->add_option("--lo2", env_lo2);
    envelope->add_option("--hi2", env_hi2);
    envelope->add_option("--resolution2", env_res2);

    TrainArgs ta;
    auto* traincmd = app.add_subcommand("train", "stochastic maximum likelihood");
    add_global(traincmd, ta.g);
    traincmd->add_option("--preset", ta.preset, "toy-bas | sdbm-500");
    traincmd->add_option("--model", ta.model_path, "initial model file");
    traincmd->add_option("--data", ta.data_path, "training examples (.csv or .silb)");
    traincmd->add_option("--test", ta.test_path, "held-out examples");
    traincmd->add_option("--lr", ta.lr);
    traincmd->add_option("--updates", ta.updates);
    traincmd->add_option("--batch", ta.batch);
    traincmd->add_option("--pos_steps", ta.pos_steps);
    traincmd->add_option("--neg_steps", ta.neg_steps);
    traincmd->add_option("--reg", ta.reg, "soft-deep base strength (0 = off)");
    traincmd->add_option("--eta", ta.eta, "soft-deep decay exponent");
    traincmd->add_option("--center_rate", ta.center_rate, "offset update rate (0 = off)");
    traincmd->add_option("--log_interval", ta.log_interval);
    traincmd->add_option("--init_sigma", ta.init_sigma, "preset initializer scale");

    TrainArgs sa;
    int sweep_configs = 16;
    auto* sweep = app.add_subcommand("sweep", "random hyperparameter search");
    add_global(sweep, sa.g);
    sweep->add_option("--preset", sa.preset);
    sweep->add_option("--model", sa.model_path);
    sweep->add_option("--data", sa.data_path);
    sweep->add_option("--test", sa.test_path);
    sweep->add_option("--updates", sa.updates);
    sweep->add_option("--batch", sa.batch);
    sweep->add_option("--configs", sweep_configs);
    sweep->add_option("--log_interval", sa.log_interval);
    sweep->add_option("--init_sigma", sa.init_sigma);

    Global vg;
    std::string eval_model, eval_data;
    bool eval_exact = false, eval_meanfield = false;
    int ais_runs = 100, ais_betas = 1000;
    auto* evalcmd = app.add_subcommand("eval", "log Z and test likelihood");
    add_global(evalcmd, vg);
    evalcmd->add_option("--model", eval_model)->required();
    evalcmd->add_option("--data", eval_data);
    evalcmd->add_flag("--exact", eval_exact, "exact log Z instead of AIS");
    evalcmd->add_flag("--meanfield", eval_meanfield, "mean-field likelihood bound");
    evalcmd->add_option("--ais_runs", ais_runs);
    evalcmd->add_option("--ais_betas", ais_betas);

    Global sg;
    std::string sample_model, sample_data;
    int chain_steps = 1000, sample_count = 64;
    auto* sample = app.add_subcommand("sample", "draw visible samples");
    add_global(sample, sg);
    sample->add_option("--model", sample_model)->required();
    sample->add_option("--chain_steps", chain_steps);
    sample->add_option("--count", sample_count);
    sample->add_option("--data", sample_data, "dataset for nearest-neighbor report");

    Global cg;
    std::string conv_in, conv_out = "data.csv", conv_binarize, conv_toy;
    std::uint64_t conv_seed = 0;
    int conv_rows = 0, conv_cols = 0;
    auto* convert = app.add_subcommand("convert-data", "dataset format conversion");
    add_global(convert, cg);
    convert->add_option("--input", conv_in, "IDX, SILB, or CSV file");
    convert->add_option("--output", conv_out, "output name (.csv or .silb)");
    convert->add_option("--binarize", conv_binarize, "stochastic (for grayscale IDX)");
    convert->add_option("--binarize_seed", conv_seed);
    convert->add_option("--rows", conv_rows, "image rows for SILB output");
    convert->add_option("--cols", conv_cols, "image cols for SILB output");
    convert->add_option("--toy", conv_toy, "bars-and-stripes:WxH | parity:N");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*construct) return run_construct(ca);
        if (*inspect) return run_inspect(ig, inspect_model);
        if (*regions) return run_regions(rg, regions_model, regions_method, grid_resolution);
        if (*bounds) return run_bounds(bg, bounds_model, bounds_samples, bounds_range);
        if (*envelope)
            return run_export_envelope(eg, env_model, env_coord, env_lo, env_hi, env_res,
                                       env_coord2, env_lo2, env_hi2, env_res2);
        if (*traincmd) return run_train(ta);
        if (*sweep) return run_sweep(sa, sweep_configs);
        if (*evalcmd)
            return run_eval(vg, eval_model, eval_data, eval_exact, ais_runs, ais_betas,
                            eval_meanfield);
        if (*sample) return run_sample(sg, sample_model, chain_steps, sample_count, sample_data);
        if (*convert)
            return run_convert(cg, conv_in, conv_out, conv_binarize, conv_seed, conv_rows,
                               conv_cols, conv_toy);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        std::cerr << "error: " << msg << "\n";
        return msg.find("cannot") == 0 ? 4 : 3;
    }
    return 2;
}
