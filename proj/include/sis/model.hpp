#ifndef SIS_MODEL_HPP
#define SIS_MODEL_HPP

#include <optional>
#include <string>
#include <vector>

#include "sis/types.hpp"

namespace sis {

/// Raw model fields, prior to validation. Mirrors the model JSON file.
struct ModelData {
    Vec weights;      ///< population fraction per feature, must sum to 1
    Vec gamma;        ///< recovery rates, strictly positive
    Matrix kernel;    ///< kernel(i,j): rate at which feature j infects feature i
    Vec cost_density; ///< per-capita vaccination cost
    std::vector<std::string> labels; ///< optional feature names (empty or size n)
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
    std::string to_string() const;
};

/// Structural validation of raw model fields. Collects every violation
/// rather than stopping at the first.
ValidationReport validate(const ModelData& data);

/// An SIS model on a finite feature space: weights mu, recovery rates gamma,
/// transmission kernel k and vaccination cost density. Immutable once built;
/// safe to share across threads.
class Model {
public:
    /// Validates and constructs. Weight sums within 1e-9 of 1 are
    /// renormalized with a warning; anything further off is an error.
    static Model create(ModelData data);

    std::size_t size() const { return weights_.size(); }
    const Vec& weights() const { return weights_; }
    const Vec& gamma() const { return gamma_; }
    const Matrix& kernel() const { return kernel_; }
    const Vec& cost_density() const { return cost_; }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    Model() = default;
    Vec weights_, gamma_, cost_;
    Matrix kernel_;
    std::vector<std::string> labels_;
    std::vector<std::string> warnings_;
};

/// Per-feature fraction left non-vaccinated; eta = 1 vaccinates no one,
/// eta = 0 everyone. Entries are clamped from at most 1e-12 outside [0,1].
class Strategy {
public:
    explicit Strategy(Vec eta);
    static Strategy ones(std::size_t n) { return Strategy(Vec(n, 1.0)); }
    static Strategy zeros(std::size_t n) { return Strategy(Vec(n, 0.0)); }

    std::size_t size() const { return eta_.size(); }
    const Vec& eta() const { return eta_; }
    double operator[](std::size_t i) const { return eta_[i]; }

private:
    Vec eta_;
};

/// Affine vaccination cost sum_i (1 - eta_i) c_i mu_i. Doing nothing costs
/// nothing: cost(m, ones) == 0.
double cost(const Model& model, const Strategy& eta);

/// Folds the cost density into the measure and the recovery rate into the
/// kernel: mu0 = c*mu, k0(x,y) = k(x,y)/(c(y)*gamma(y)), gamma0 = c0 = 1.
/// Requires c > 0 and sum(c*mu) = 1. Cost (against a unit density) and
/// R_e of every strategy are unchanged; the next-generation matrices of
/// the two models coincide entrywise.
Model normalize(const Model& model);

// --- model & strategy files -------------------------------------------------

/// Parses the model JSON object: keys "weights", "gamma", "cost", "kernel"
/// and optional "labels". Unknown keys are rejected.
Model model_from_json(const std::string& text);
Model load_model(const std::string& path);

/// Serializes with 17 significant digits; parse(serialize(m)) is exact.
std::string model_to_json(const Model& model);

/// Strategy JSON: {"eta": [..]}, length n.
Strategy strategy_from_json(const std::string& text, std::size_t n);
Strategy load_strategy(const std::string& path, std::size_t n);

/// Plain vector JSON: {"f": [..]} (side-dependent length, checked by caller).
Vec vector_from_json(const std::string& text, const std::string& key);
Vec load_vector(const std::string& path, const std::string& key);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// %.17g formatting used for every number we print.
std::string format_double(double x);

}  // namespace sis

#endif
