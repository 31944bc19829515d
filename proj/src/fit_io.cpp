#include "made/fit_io.hpp"

#include <fstream>
#include <json.hpp>

#include "made/errors.hpp"

namespace made {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& M) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, int expect_cols = -1) {
    const int rows = static_cast<int>(j.size());
    int cols = expect_cols;
    if (rows > 0) cols = static_cast<int>(j[0].size());
    if (cols < 0) cols = 0;
    Eigen::MatrixXd M(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) M(r, c) = j[r][c].get<double>();
    return M;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Eigen::VectorXd vector_from_json(const json& j) {
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
    return v;
}

}  // namespace

Family FitDocument::make_family() const {
    Family fam = Family::from_name(family, shape);
    return fam;
}

MadeConfig FitDocument::make_config() const {
    MadeConfig config;
    config.d = d;
    config.bandwidth_c = bandwidth_c;
    config.bandwidth_h = bandwidth_h_override;
    config.weight_mode =
        weight_mode == "raw" ? WeightMode::Raw : WeightMode::Refined;
    config.init = init == "random" ? InitMode::Random : InitMode::Pfc;
    config.outer_tol = outer_tol;
    config.outer_max_iter = outer_max_iter;
    config.seed = seed;
    return config;
}

FitDocument make_document(const Family& family, const MadeConfig& config,
                          const MadeFit& fit) {
    FitDocument doc;
    doc.family = family.label();
    doc.shape = family.shape();
    doc.dispersion = fit.dispersion;
    doc.d = config.d;
    doc.bandwidth_c = config.bandwidth_c;
    doc.bandwidth_h_override = config.bandwidth_h;
    doc.weight_mode = config.weight_mode == WeightMode::Raw ? "raw" : "refined";
    doc.init = config.init == InitMode::Random ? "random" : "pfc";
    doc.outer_tol = config.outer_tol;
    doc.outer_max_iter = config.outer_max_iter;
    doc.seed = config.seed;
    doc.bandwidth_h = fit.bandwidth_h;
    doc.converged = fit.converged;
    doc.outer_iterations = fit.outer_iterations;
    doc.objective = fit.objective;
    doc.B = fit.B;
    doc.alpha = fit.alpha;
    doc.gamma = fit.gamma;
    doc.trace = fit.trace;
    return doc;
}

std::string to_json_string(const FitDocument& doc) {
    json j;
    j["format"] = "made-fit";
    j["version"] = doc.version;
    j["family"] = doc.family;
    if (doc.shape) j["shape"] = *doc.shape;
    j["dispersion"] = doc.dispersion;

    json config;
    config["d"] = doc.d;
    config["bandwidth_c"] = doc.bandwidth_c;
    if (doc.bandwidth_h_override) config["bandwidth_h"] = *doc.bandwidth_h_override;
    config["weight_mode"] = doc.weight_mode;
    config["init"] = doc.init;
    config["outer_tol"] = doc.outer_tol;
    config["outer_max_iter"] = doc.outer_max_iter;
    config["seed"] = doc.seed;
    j["config"] = config;

    json data;
    data["response"] = doc.response;
    data["predictors"] = doc.predictors;
    data["trials_column"] = doc.trials_column;
    data["offset_column"] = doc.offset_column;
    data["standardized"] = doc.standardized;
    data["centers"] = vector_to_json(doc.centers);
    data["scales"] = vector_to_json(doc.scales);
    j["data"] = data;

    j["bandwidth_h"] = doc.bandwidth_h;
    j["converged"] = doc.converged;
    j["outer_iterations"] = doc.outer_iterations;
    j["objective"] = doc.objective;
    j["b"] = matrix_to_json(doc.B);
    j["alpha"] = vector_to_json(doc.alpha);
    j["gamma"] = matrix_to_json(doc.gamma);

    json trace = json::array();
    for (const auto& row : doc.trace)
        trace.push_back({{"iteration", row.iteration},
                         {"phase", std::string(1, row.phase)},
                         {"objective", row.objective},
                         {"subspace_delta", row.subspace_delta}});
    j["trace"] = trace;
    return j.dump(2);
}

FitDocument from_json_string(const std::string& text) {
    json j = json::parse(text);
    if (j.value("format", "") != "made-fit")
        throw DataError("not a made-fit document");
    FitDocument doc;
    doc.version = j.at("version").get<int>();
    if (doc.version != 1)
        throw DataError("unsupported made-fit version " +
                        std::to_string(doc.version));
    doc.family = j.at("family").get<std::string>();
    if (j.contains("shape")) doc.shape = j["shape"].get<double>();
    doc.dispersion = j.at("dispersion").get<double>();

    const json& config = j.at("config");
    doc.d = config.at("d").get<int>();
    doc.bandwidth_c = config.at("bandwidth_c").get<double>();
    if (config.contains("bandwidth_h"))
        doc.bandwidth_h_override = config["bandwidth_h"].get<double>();
    doc.weight_mode = config.at("weight_mode").get<std::string>();
    doc.init = config.at("init").get<std::string>();
    doc.outer_tol = config.at("outer_tol").get<double>();
    doc.outer_max_iter = config.at("outer_max_iter").get<int>();
    doc.seed = config.at("seed").get<std::uint64_t>();

    const json& data = j.at("data");
    doc.response = data.at("response").get<std::string>();
    doc.predictors = data.at("predictors").get<std::vector<std::string>>();
    doc.trials_column = data.at("trials_column").get<std::string>();
    doc.offset_column = data.at("offset_column").get<std::string>();
    doc.standardized = data.at("standardized").get<bool>();
    doc.centers = vector_from_json(data.at("centers"));
    doc.scales = vector_from_json(data.at("scales"));

    doc.bandwidth_h = j.at("bandwidth_h").get<double>();
    doc.converged = j.at("converged").get<bool>();
    doc.outer_iterations = j.at("outer_iterations").get<int>();
    doc.objective = j.at("objective").get<double>();
    doc.B = matrix_from_json(j.at("b"), doc.d);
    doc.alpha = vector_from_json(j.at("alpha"));
    doc.gamma = matrix_from_json(j.at("gamma"), doc.d);
    for (const auto& row : j.at("trace"))
        doc.trace.push_back({row.at("iteration").get<int>(),
                             row.at("phase").get<std::string>()[0],
                             row.at("objective").get<double>(),
                             row.at("subspace_delta").get<double>()});
    return doc;
}

void save_fit(const std::string& path, const FitDocument& doc) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << to_json_string(doc) << "\n";
}

FitDocument load_fit(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return from_json_string(text);
}

}  // namespace made
