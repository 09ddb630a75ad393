#include "sdbm/model_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace sdbm {

namespace {

using nlohmann::json;

json encode_real(double x, RealEncoding enc) {
    if (enc == RealEncoding::decimal) return x;
    char buf[20];
    std::snprintf(buf, sizeof(buf), "0x%016llx",
                  static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(x)));
    return std::string(buf);
}

double decode_real(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string& s = j.get_ref<const std::string&>();
        if (s.rfind("0x", 0) == 0)
            return std::bit_cast<double>(static_cast<std::uint64_t>(std::stoull(s.substr(2), nullptr, 16)));
        return std::stod(s);
    }
    throw std::runtime_error("model file: real value is neither number nor string");
}

json encode_vec(const Vec& v, RealEncoding enc) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(encode_real(v[i], enc));
    return arr;
}

Vec decode_vec(const json& arr) {
    Vec v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = decode_real(arr[i]);
    return v;
}

}  // namespace

void save_model(const Model& model, std::ostream& out, RealEncoding enc) {
    json doc;
    doc["format_version"] = 1;
    doc["layer_sizes"] = model.spec().layer_sizes;
    json mask = json::array();
    for (auto [k, l] : model.spec().mask) mask.push_back({k, l});
    doc["mask"] = mask;
    json weights = json::object();
    for (std::size_t p = 0; p < model.spec().mask.size(); ++p) {
        auto [k, l] = model.spec().mask[p];
        const Mat& w = model.params().weights[p];
        json arr = json::array();
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) arr.push_back(encode_real(w(i, j), enc));
        weights[std::to_string(k) + "," + std::to_string(l)] = std::move(arr);
    }
    doc["weights"] = std::move(weights);
    json biases = json::array();
    for (const Vec& b : model.params().biases) biases.push_back(encode_vec(b, enc));
    doc["biases"] = std::move(biases);
    if (model.params().has_offsets()) {
        json offsets = json::array();
        for (const Vec& o : model.params().offsets) offsets.push_back(encode_vec(o, enc));
        doc["offsets"] = std::move(offsets);
    }
    out << doc.dump(1) << "\n";
}

void save_model(const Model& model, const std::string& path, RealEncoding enc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    save_model(model, out, enc);
}

Model load_model(std::istream& in) {
    json doc = json::parse(in);
    if (doc.at("format_version").get<int>() != 1)
        throw std::runtime_error("unsupported model format_version");
    NetworkSpec spec;
    spec.layer_sizes = doc.at("layer_sizes").get<std::vector<int>>();
    for (const auto& pair : doc.at("mask"))
        spec.mask.emplace_back(pair.at(0).get<int>(), pair.at(1).get<int>());
    spec.validate();

    Parameters params = Parameters::zeros(spec);
    const json& weights = doc.at("weights");
    for (auto it = weights.begin(); it != weights.end(); ++it) {
        const std::string& key = it.key();
        const auto comma = key.find(',');
        const int k = std::stoi(key.substr(0, comma));
        const int l = std::stoi(key.substr(comma + 1));
        const int p = spec.pair_index(k, l);
        if (p < 0) throw std::runtime_error("weight block for unmasked pair " + key);
        Mat& w = params.weights[p];
        const json& arr = it.value();
        if (static_cast<Eigen::Index>(arr.size()) != w.size())
            throw std::runtime_error("weight block size mismatch for pair " + key);
        std::size_t idx = 0;
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = decode_real(arr[idx++]);
    }
    const json& biases = doc.at("biases");
    if (biases.size() != spec.layer_sizes.size())
        throw std::runtime_error("bias list count mismatch");
    for (std::size_t k = 0; k < biases.size(); ++k) params.biases[k] = decode_vec(biases[k]);
    if (doc.contains("offsets")) {
        for (const auto& o : doc["offsets"]) params.offsets.push_back(decode_vec(o));
    }
    return Model(std::move(spec), std::move(params));
}

Model load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return load_model(in);
}

}  // namespace sdbm
