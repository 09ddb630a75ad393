#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sdbm/rng.hpp"

namespace sdbm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// One 0/1 (or, for the visible layer, real-valued) assignment per unit,
// partitioned by layer. state[0] is the visible layer.
using LayerState = std::vector<Vec>;

// Batched chain states: one n^k x num_chains matrix per layer.
using LayerBatch = std::vector<Mat>;

enum class Topology { rbm, dbm, sdbm, general };

// Layer sizes plus a connectivity mask over ordered layer pairs (k, l)
// with 0 <= l < k <= L. Connections within a layer are never allowed.
struct NetworkSpec {
    std::vector<int> layer_sizes;               // n^0 .. n^L
    std::vector<std::pair<int, int>> mask;      // connected pairs, k > l

    static NetworkSpec rbm(int n_vis, int n_hid);
    static NetworkSpec dbm(const std::vector<int>& layer_sizes);
    static NetworkSpec sdbm(const std::vector<int>& layer_sizes);

    int depth() const { return static_cast<int>(layer_sizes.size()) - 1; }
    int num_visible() const { return layer_sizes[0]; }
    int num_hidden() const;
    int num_units() const;
    bool connected(int k, int l) const { return pair_index(k, l) >= 0; }
    int pair_index(int k, int l) const;  // index into mask / weight list, -1 if absent

    Topology topology() const;
    void validate() const;  // throws std::invalid_argument

    bool operator==(const NetworkSpec&) const = default;
};

// Per masked layer pair, an n^k x n^l weight block; per layer, a bias
// vector; optional per-unit centering offsets (empty vector = all zero).
struct Parameters {
    std::vector<Mat> weights;   // aligned with NetworkSpec::mask
    std::vector<Vec> biases;    // one per layer
    std::vector<Vec> offsets;   // empty, or one per layer

    static Parameters zeros(const NetworkSpec& spec);
    static Parameters gaussian(const NetworkSpec& spec, double sigma, Rng& rng);

    bool has_offsets() const { return !offsets.empty(); }
};

// Immutable model handle bundling a spec with validated parameters.
class Model {
public:
    Model(NetworkSpec spec, Parameters params);

    static Model zeros(NetworkSpec spec);
    static Model gaussian(NetworkSpec spec, double sigma, Rng& rng);

    const NetworkSpec& spec() const { return spec_; }
    const Parameters& params() const { return params_; }

    // nullptr when the pair is unmasked.
    const Mat* weight(int k, int l) const;
    const Vec& bias(int k) const { return params_.biases[k]; }
    Vec offset(int k) const;  // zero vector when centering is off

    // Eq.-style layered energy: unmasked pairs contribute exactly zero;
    // with nonzero offsets each state enters the quadratic term as (x - mu).
    double energy(const LayerState& state) const;

    // Total input to every unit of layer k given the other layers:
    // sum over masked partner layers of w . (x - mu), plus b^k.
    Vec layer_input(int k, const LayerState& state) const;
    Vec layer_conditional(int k, const LayerState& state) const;

    // Batched versions for chain ensembles.
    Mat layer_input_batch(int k, const LayerBatch& states) const;

    Model rescaled(double beta) const;

    // Folds offsets into biases; the returned model has no offsets and
    // defines the same distribution (energies differ by a constant).
    Model uncentered_equivalent() const;

    LayerState zero_state() const;

private:
    NetworkSpec spec_;
    Parameters params_;
};

double sigmoid(double x);

// Resamples each scheduled layer jointly from its conditional. Empty order
// means ascending 0..L (1..L when the visible layer is clamped).
LayerState gibbs_sweep(const Model& model, LayerState state, Rng& rng,
                       bool clamp_visible = false, const std::vector<int>& order = {});
void gibbs_sweep_batch(const Model& model, LayerBatch& states, Rng& rng,
                       bool clamp_visible = false, const std::vector<int>& order = {});

// Even/odd layer grouping; exact block Gibbs for DBM topology.
std::vector<int> parity_order(const NetworkSpec& spec);

// Hidden-configuration indexing, layer-major with unit 1 of layer 1 as bit 0.
std::uint64_t num_hidden_configs(const NetworkSpec& spec);
void hidden_from_index(const NetworkSpec& spec, std::uint64_t index, LayerState& state);
std::uint64_t hidden_to_index(const NetworkSpec& spec, const LayerState& state);
std::string config_bitstring(const NetworkSpec& spec, std::uint64_t index);

void validate_state(const NetworkSpec& spec, const LayerState& state);

}  // namespace sdbm
