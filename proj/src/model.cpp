#include "sis/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace sis {

Matrix Matrix::from_rows(const std::vector<Vec>& rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.cols())
            throw InputError("matrix rows have inconsistent lengths");
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Vec Matrix::apply(const Vec& x) const {
    Vec y(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

double Matrix::max_row_sum() const {
    double m = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j);
        m = std::max(m, s);
    }
    return m;
}

bool Matrix::all_zero() const {
    for (double x : data_) if (x != 0.0) return false;
    return true;
}

std::string ValidationReport::to_string() const {
    if (ok()) return "ok";
    std::string s;
    for (const auto& v : violations) {
        if (!s.empty()) s += "; ";
        s += v;
    }
    return s;
}

namespace {

bool finite(double x) { return std::isfinite(x); }

std::string num(double x) { return format_double(x); }

}  // namespace

ValidationReport validate(const ModelData& data) {
    ValidationReport report;
    auto add = [&](const std::string& v) { report.violations.push_back(v); };

    const std::size_t n = data.weights.size();
    if (n == 0) add("model has no features");
    if (data.gamma.size() != n)
        add("gamma has length " + std::to_string(data.gamma.size()) + " != " + std::to_string(n));
    if (data.cost_density.size() != n)
        add("cost has length " + std::to_string(data.cost_density.size()) + " != " + std::to_string(n));
    if (data.kernel.rows() != n || data.kernel.cols() != n)
        add("kernel is " + std::to_string(data.kernel.rows()) + "x" + std::to_string(data.kernel.cols()) +
            ", expected " + std::to_string(n) + "x" + std::to_string(n));
    if (!data.labels.empty() && data.labels.size() != n)
        add("labels has length " + std::to_string(data.labels.size()) + " != " + std::to_string(n));

    double wsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double w = data.weights[i];
        if (!finite(w)) add("weights[" + std::to_string(i) + "] is not finite");
        else if (w < 0.0) add("weights[" + std::to_string(i) + "] = " + num(w) + " is negative");
        else if (w == 0.0) add("weights[" + std::to_string(i) + "] is zero; every feature needs positive mass");
        wsum += w;
    }
    if (n > 0 && std::abs(wsum - 1.0) > 1e-9)
        add("weights sum to " + num(wsum) + " != 1");

    for (std::size_t i = 0; i < data.gamma.size(); ++i) {
        double g = data.gamma[i];
        if (!finite(g) || g <= 0.0)
            add("gamma[" + std::to_string(i) + "] = " + num(g) + " not strictly positive");
    }
    for (std::size_t i = 0; i < data.kernel.rows(); ++i)
        for (std::size_t j = 0; j < data.kernel.cols(); ++j) {
            double k = data.kernel(i, j);
            if (!finite(k) || k < 0.0)
                add("kernel[" + std::to_string(i) + "][" + std::to_string(j) + "] = " + num(k) +
                    " is negative");
        }
    for (std::size_t i = 0; i < data.cost_density.size(); ++i) {
        double c = data.cost_density[i];
        if (!finite(c) || c < 0.0)
            add("cost[" + std::to_string(i) + "] = " + num(c) + " is negative");
    }
    return report;
}

Model Model::create(ModelData data) {
    ValidationReport report = validate(data);
    if (!report.ok()) throw InputError("invalid model: " + report.to_string());

    Model m;
    double wsum = sum(data.weights);
    if (std::abs(wsum - 1.0) > 1e-12) {
        for (double& w : data.weights) w /= wsum;
        m.warnings_.push_back("weights summed to " + num(wsum) + "; renormalized");
    }
    m.weights_ = std::move(data.weights);
    m.gamma_ = std::move(data.gamma);
    m.kernel_ = std::move(data.kernel);
    m.cost_ = std::move(data.cost_density);
    m.labels_ = std::move(data.labels);
    return m;
}

Strategy::Strategy(Vec eta) : eta_(std::move(eta)) {
    for (std::size_t i = 0; i < eta_.size(); ++i) {
        double v = eta_[i];
        if (!std::isfinite(v) || v < -1e-12 || v > 1.0 + 1e-12)
            throw InputError("eta[" + std::to_string(i) + "] = " + format_double(v) +
                             " outside [0,1]");
        eta_[i] = std::min(1.0, std::max(0.0, v));
    }
}

double cost(const Model& model, const Strategy& eta) {
    check_dimension(eta.size(), model.size(), "strategy");
    double c = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i)
        c += (1.0 - eta[i]) * model.cost_density()[i] * model.weights()[i];
    return c;
}

Model normalize(const Model& model) {
    const std::size_t n = model.size();
    double cmu = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (model.cost_density()[i] <= 0.0)
            throw InputError("normalize: cost[" + std::to_string(i) + "] is not strictly positive");
        cmu += model.cost_density()[i] * model.weights()[i];
    }
    if (std::abs(cmu - 1.0) > 1e-9)
        throw InputError("normalize: cost density integrates to " + format_double(cmu) +
                         " != 1; pre-scale the cost density first");

    ModelData out;
    out.weights.resize(n);
    out.gamma.assign(n, 1.0);
    out.cost_density.assign(n, 1.0);
    out.kernel = Matrix(n, n);
    out.labels = model.labels();
    for (std::size_t i = 0; i < n; ++i)
        out.weights[i] = model.cost_density()[i] * model.weights()[i];
    // Both the cost density and the recovery rate divide at the infector
    // argument, matching the k/gamma structure of the next-generation
    // kernel; the effective next-generation matrices then agree entrywise.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out.kernel(i, j) = model.kernel()(i, j) / (model.cost_density()[j] * model.gamma()[j]);
    return Model::create(std::move(out));
}

// --- files -------------------------------------------------------------------

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write file: " + path);
    out << content;
}

namespace {

using nlohmann::json;

json parse_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw InputError("malformed JSON");
    return j;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw InputError("expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) { known = true; break; }
        if (!known) throw InputError("unknown key \"" + it.key() + "\"");
    }
}

Vec number_array(const json& j, const std::string& key) {
    if (!j.contains(key)) throw InputError("missing key \"" + key + "\"");
    const json& a = j.at(key);
    if (!a.is_array()) throw InputError("\"" + key + "\" must be an array");
    Vec v;
    v.reserve(a.size());
    for (const auto& x : a) {
        if (!x.is_number()) throw InputError("\"" + key + "\" must contain numbers only");
        v.push_back(x.get<double>());
    }
    return v;
}

}  // namespace

Model model_from_json(const std::string& text) {
    json j = parse_json(text);
    reject_unknown_keys(j, {"labels", "weights", "gamma", "cost", "kernel"});

    ModelData data;
    data.weights = number_array(j, "weights");
    data.gamma = number_array(j, "gamma");
    data.cost_density = number_array(j, "cost");

    if (!j.contains("kernel")) throw InputError("missing key \"kernel\"");
    const json& rows = j.at("kernel");
    if (!rows.is_array()) throw InputError("\"kernel\" must be an array of arrays");
    std::vector<Vec> kernel_rows;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const json& r = rows[i];
        if (!r.is_array()) throw InputError("\"kernel\" must be an array of arrays");
        Vec row;
        for (const auto& x : r) {
            if (!x.is_number()) throw InputError("\"kernel\" must contain numbers only");
            row.push_back(x.get<double>());
        }
        kernel_rows.push_back(std::move(row));
    }
    if (!kernel_rows.empty()) {
        for (const auto& r : kernel_rows)
            if (r.size() != kernel_rows[0].size())
                throw InputError("\"kernel\" rows have inconsistent lengths");
        data.kernel = Matrix::from_rows(kernel_rows);
    }

    if (j.contains("labels")) {
        const json& ls = j.at("labels");
        if (!ls.is_array()) throw InputError("\"labels\" must be an array of strings");
        for (const auto& l : ls) {
            if (!l.is_string()) throw InputError("\"labels\" must be an array of strings");
            data.labels.push_back(l.get<std::string>());
        }
    }
    return Model::create(std::move(data));
}

Model load_model(const std::string& path) {
    try {
        return model_from_json(read_file(path));
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

namespace {

void append_number_array(std::string& out, const Vec& v) {
    out += '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += format_double(v[i]);
    }
    out += ']';
}

}  // namespace

std::string model_to_json(const Model& model) {
    std::string out = "{\n";
    if (!model.labels().empty()) {
        out += "  \"labels\": [";
        for (std::size_t i = 0; i < model.labels().size(); ++i) {
            if (i) out += ", ";
            out += '"' + model.labels()[i] + '"';
        }
        out += "],\n";
    }
    out += "  \"weights\": ";
    append_number_array(out, model.weights());
    out += ",\n  \"gamma\": ";
    append_number_array(out, model.gamma());
    out += ",\n  \"cost\": ";
    append_number_array(out, model.cost_density());
    out += ",\n  \"kernel\": [\n";
    for (std::size_t i = 0; i < model.size(); ++i) {
        Vec row(model.size());
        for (std::size_t j = 0; j < model.size(); ++j) row[j] = model.kernel()(i, j);
        out += "    ";
        append_number_array(out, row);
        out += (i + 1 < model.size()) ? ",\n" : "\n";
    }
    out += "  ]\n}\n";
    return out;
}

Strategy strategy_from_json(const std::string& text, std::size_t n) {
    json j = parse_json(text);
    reject_unknown_keys(j, {"eta"});
    Vec eta = number_array(j, "eta");
    check_dimension(eta.size(), n, "eta");
    return Strategy(std::move(eta));
}

Strategy load_strategy(const std::string& path, std::size_t n) {
    try {
        return strategy_from_json(read_file(path), n);
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

Vec vector_from_json(const std::string& text, const std::string& key) {
    json j = parse_json(text);
    if (!j.is_object()) throw InputError("expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != key) throw InputError("unknown key \"" + it.key() + "\"");
    return number_array(j, key);
}

Vec load_vector(const std::string& path, const std::string& key) {
    try {
        return vector_from_json(read_file(path), key);
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

}  // namespace sis
