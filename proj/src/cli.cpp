#include "made/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <json.hpp>

#include "made/csv.hpp"
#include "made/dimension.hpp"
#include "made/errors.hpp"
#include "made/estimator.hpp"
#include "made/family.hpp"
#include "made/fit_io.hpp"
#include "made/predict.hpp"
#include "made/simulate.hpp"

namespace made {

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

struct FamilyArgs {
    std::string name = "gaussian";
    double shape = 0.0;
    bool has_shape = false;
    double dispersion = 0.0;
    bool has_dispersion = false;

    Family build() const {
        return Family::from_name(
            name, has_shape ? std::optional<double>(shape) : std::nullopt);
    }
    void add_options(CLI::App* cmd) {
        cmd->add_option("--family", name,
                        "response family (binomial, poisson, geometric, negbin, "
                        "gaussian, exponential, gamma, invgaussian)");
        cmd->add_option("--shape", shape,
                        "shape parameter (kappa, or sigma^2 for gaussian)")
            ->each([this](const std::string&) { has_shape = true; });
        cmd->add_option("--dispersion", dispersion, "dispersion phi override")
            ->each([this](const std::string&) { has_dispersion = true; });
    }
};

struct SchemaArgs {
    std::string response = "y";
    std::vector<std::string> predictors;
    std::string trials_column;
    std::string offset_column;
    bool standardize = true;

    DatasetSchema build() const {
        DatasetSchema schema;
        schema.response = response;
        schema.predictors = predictors;
        schema.trials_column = trials_column;
        schema.offset_column = offset_column;
        schema.standardize = standardize;
        return schema;
    }
    void add_options(CLI::App* cmd) {
        cmd->add_option("--response", response, "response column name");
        cmd->add_option("--predictors", predictors,
                        "predictor columns (default: all numeric columns)")
            ->delimiter(',');
        cmd->add_option("--trials-column", trials_column,
                        "binomial trial-count column");
        cmd->add_option("--offset-column", offset_column,
                        "offset column added to the linear predictor");
        cmd->add_flag("--standardize,!--no-standardize", standardize,
                      "center and scale predictors (default on)");
    }
};

struct ConfigArgs {
    MadeConfig config;
    double bandwidth_h = 0.0;
    bool has_h = false;
    std::string weight_mode = "refined";
    std::string init = "pfc";
    bool estimate_dispersion = false;

    MadeConfig build() const {
        MadeConfig out = config;
        if (has_h) out.bandwidth_h = bandwidth_h;
        out.weight_mode =
            weight_mode == "raw" ? WeightMode::Raw : WeightMode::Refined;
        out.init = init == "random" ? InitMode::Random : InitMode::Pfc;
        out.dispersion_mode = estimate_dispersion ? DispersionMode::Estimate
                                                  : DispersionMode::Known;
        return out;
    }
    void add_options(CLI::App* cmd) {
        cmd->add_option("--d", config.d, "reduction dimension");
        cmd->add_option("--bandwidth-c", config.bandwidth_c,
                        "bandwidth multiplier c in h = c n^(-1/(d+4))");
        cmd->add_option("--bandwidth-h", bandwidth_h,
                        "explicit bandwidth h (overrides the rule)")
            ->each([this](const std::string&) { has_h = true; });
        cmd->add_option("--weight-mode", weight_mode, "raw or refined")
            ->check(CLI::IsMember({"raw", "refined"}));
        cmd->add_option("--init", init, "initialization: pfc or random")
            ->check(CLI::IsMember({"pfc", "random"}));
        cmd->add_flag("--estimate-dispersion", estimate_dispersion,
                      "estimate the dispersion within the fit");
        cmd->add_option("--outer-tol", config.outer_tol,
                        "subspace-change convergence tolerance");
        cmd->add_option("--outer-max-iter", config.outer_max_iter,
                        "maximum outer iterations");
        cmd->add_option("--cg-max-iter", config.cg.max_iter,
                        "maximum conjugate-gradient iterations per B step");
        cmd->add_option("--cg-tol", config.cg.tol,
                        "gradient tolerance of the B step");
        cmd->add_option("--seed", config.seed, "random seed");
        cmd->add_option("--threads", config.threads,
                        "worker threads (0: MADE_THREADS or hardware)");
    }
};

PredictorKind predictor_from_name(const std::string& name) {
    if (name == "nw") return PredictorKind::NW;
    if (name == "ll1") return PredictorKind::LL1;
    if (name == "ll2") return PredictorKind::LL2;
    throw ConfigError("unknown predictor '" + name + "'");
}

double corr_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
    const double my = y.mean(), mh = yhat.mean();
    const double cov = ((y.array() - my) * (yhat.array() - mh)).sum();
    const double vy = (y.array() - my).square().sum();
    const double vh = (yhat.array() - mh).square().sum();
    if (vy <= 0.0 || vh <= 0.0) return 0.0;
    return cov * cov / (vy * vh);
}

void print_basis_table(const std::vector<std::string>& names,
                       const Eigen::MatrixXd& B, std::ostream& os) {
    os << std::left << std::setw(14) << "predictor";
    for (int c = 0; c < B.cols(); ++c)
        os << std::right << std::setw(12) << ("b" + std::to_string(c + 1));
    os << "\n";
    for (int r = 0; r < B.rows(); ++r) {
        os << std::left << std::setw(14) << names[r];
        for (int c = 0; c < B.cols(); ++c)
            os << std::right << std::setw(12) << std::fixed
               << std::setprecision(4) << B(r, c);
        os << "\n";
    }
    os.unsetf(std::ios::fixed);
}

void write_trace_csv(const std::string& path,
                     const std::vector<OuterTraceRow>& trace) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& t : trace)
        rows.push_back({std::to_string(t.iteration), std::string(1, t.phase),
                        format_double(t.objective),
                        format_double(t.subspace_delta)});
    write_csv(path, {"iteration", "phase", "objective", "subspace_delta"}, rows);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// ---------------------------------------------------------------- fit

struct FitCmd {
    std::string data_path, out_path, trace_path;
    FamilyArgs family;
    SchemaArgs schema;
    ConfigArgs config;

    int run() {
        const Family fam = family.build();
        IngestResult ingest = ingest_csv(data_path, schema.build());
        ingest.data.dispersion = family.has_dispersion
                                     ? family.dispersion
                                     : fam.default_dispersion();
        const MadeConfig cfg = config.build();
        const MadeFit fit_result = fit(fam, ingest.data, cfg);

        const Eigen::VectorXd mu = fit_result.fitted_means(fam, ingest.data);
        Eigen::VectorXd ym(ingest.data.n());
        for (int i = 0; i < ingest.data.n(); ++i)
            ym(i) = fam.model_response(ingest.data.y(i), ingest.data.trial(i));
        const double r2 = corr_squared(ym, mu);

        std::cout << "family: " << fam.label() << "  n=" << ingest.data.n()
                  << "  p=" << ingest.data.p() << "  d=" << cfg.d << "\n"
                  << "bandwidth h: " << fit_result.bandwidth_h << "\n"
                  << "converged: " << (fit_result.converged ? "yes" : "no")
                  << " after " << fit_result.outer_iterations
                  << " outer iteration(s)\n"
                  << "objective: " << fit_result.objective << "\n"
                  << "dispersion: " << fit_result.dispersion << "\n"
                  << "R^2 (squared correlation of y and fitted mean): " << r2
                  << "\n\n";
        print_basis_table(ingest.predictor_names, fit_result.B, std::cout);

        if (!out_path.empty()) {
            FitDocument doc = make_document(fam, cfg, fit_result);
            doc.response = schema.response;
            doc.predictors = ingest.predictor_names;
            doc.trials_column = schema.trials_column;
            doc.offset_column = schema.offset_column;
            doc.standardized = schema.standardize;
            doc.centers = ingest.centers;
            doc.scales = ingest.scales;
            save_fit(out_path, doc);
            std::cout << "\nfit written to " << out_path << "\n";
        }
        if (!trace_path.empty()) write_trace_csv(trace_path, fit_result.trace);
        if (!fit_result.converged)
            std::cerr << "warning: fit did not converge within the iteration "
                         "budget; best iterate written\n";
        return 0;
    }
};

// ------------------------------------------------------------- predict

struct PredictCmd {
    std::string fit_path, data_path, newdata_path, out_path;
    std::string predictor = "nw";
    bool allow_unconverged = false;

    int run() {
        const FitDocument doc = load_fit(fit_path);
        if (!doc.converged && !allow_unconverged)
            throw ConfigError(
                "fit is not converged; pass --allow-unconverged to override");
        const Family fam = doc.make_family();

        DatasetSchema schema;
        schema.response = doc.response;
        schema.predictors = doc.predictors;
        schema.trials_column = doc.trials_column;
        schema.offset_column = doc.offset_column;
        schema.standardize = false;  // stored centers/scales are re-applied
        IngestResult train = ingest_csv(data_path, schema);
        train.data.dispersion = doc.dispersion;
        if (doc.standardized)
            for (int c = 0; c < train.data.X.cols(); ++c)
                train.data.X.col(c) =
                    (train.data.X.col(c).array() - doc.centers(c)) /
                    doc.scales(c);

        // Rebuild the pieces of the fit the predictors rely on.
        MadeFit fit_state;
        fit_state.B = doc.B;
        fit_state.bandwidth_h = doc.bandwidth_h;
        fit_state.dispersion = doc.dispersion;
        const Predictor pred(fam, train.data, fit_state);

        const CsvTable new_table = read_csv(newdata_path);
        const int n_new = static_cast<int>(new_table.rows.size());
        Eigen::MatrixXd Xstar(n_new, static_cast<int>(doc.predictors.size()));
        for (std::size_t c = 0; c < doc.predictors.size(); ++c) {
            const int col = new_table.column_index(doc.predictors[c]);
            if (col < 0)
                throw DataError("new data lacks predictor column '" +
                                doc.predictors[c] + "'");
            for (int r = 0; r < n_new; ++r) {
                double v = std::stod(new_table.cell(r, col));
                if (doc.standardized) v = (v - doc.centers(c)) / doc.scales(c);
                Xstar(r, c) = v;
            }
        }
        Eigen::VectorXd offsets;
        if (!doc.offset_column.empty()) {
            const int col = new_table.column_index(doc.offset_column);
            if (col >= 0) {
                offsets.resize(n_new);
                for (int r = 0; r < n_new; ++r)
                    offsets(r) = std::stod(new_table.cell(r, col));
            }
        }

        PredictionDiagnostics diag;
        const Eigen::VectorXd yhat = pred.predict_batch(
            Xstar, predictor_from_name(predictor), offsets, &diag);

        std::vector<std::vector<std::string>> rows;
        for (int r = 0; r < n_new; ++r)
            rows.push_back({std::to_string(r), format_double(yhat(r))});
        write_csv(out_path, {"row", "prediction"}, rows);
        std::cout << "wrote " << n_new << " predictions to " << out_path << "\n";
        if (diag.uniform_weight_rows > 0)
            std::cout << "warning: " << diag.uniform_weight_rows
                      << " point(s) fell back to uniform weights\n";
        if (diag.nw_fallbacks > 0)
            std::cout << "warning: " << diag.nw_fallbacks
                      << " local fit(s) fell back to the NW predictor\n";
        return 0;
    }
};

// ----------------------------------------------------------- dimension

struct DimensionCmd {
    std::string data_path, out_prefix = "dimension";
    std::string method = "permutation";
    FamilyArgs family;
    SchemaArgs schema;
    ConfigArgs config;
    DimOptions options;
    std::string summary = "mean";
    std::string cv_predictor = "nw";
    std::string cv_loss = "squared";
    int replicates = 100;

    int run() {
        const Family fam = family.build();
        IngestResult ingest = ingest_csv(data_path, schema.build());
        ingest.data.dispersion = family.has_dispersion
                                     ? family.dispersion
                                     : fam.default_dispersion();
        options.r_perm = replicates;
        options.r_boot = replicates;
        options.summary =
            summary == "meanabs" ? GammaSummary::MeanAbs : GammaSummary::Mean;
        options.cv_predictor = predictor_from_name(cv_predictor);
        options.cv_loss = cv_loss == "absolute"
                              ? CvLoss::Absolute
                              : (cv_loss == "misclass" ? CvLoss::Misclass
                                                       : CvLoss::Squared);
        options.seed = config.config.seed;
        options.threads = config.config.threads;

        const DimMethod m = method == "bootstrap"
                                ? DimMethod::Bootstrap
                                : (method == "cv" ? DimMethod::CrossValidation
                                                  : DimMethod::Permutation);
        const DimTestResult result =
            sequential_dimension(fam, ingest.data, config.build(), m, options);

        std::vector<std::vector<std::string>> rows;
        for (const auto& step : result.steps)
            rows.push_back({method, std::to_string(step.d0),
                            format_double(step.statistic),
                            format_double(step.p_value),
                            std::to_string(step.replicates_used),
                            std::to_string(step.replicates_failed)});
        write_csv(out_prefix + ".csv",
                  {"method", "d0", "statistic", "p_value", "replicates_used",
                   "replicates_failed"},
                  rows);

        nlohmann::json j;
        j["d_hat"] = result.d_hat;
        j["method"] = method;
        j["seed"] = result.seed;
        j["level"] = options.level;
        j["complete"] = result.complete;
        j["warnings"] = result.warnings;
        std::ofstream out(out_prefix + ".json");
        out << j.dump(2) << "\n";

        std::cout << "estimated dimension d = " << result.d_hat << "\n";
        for (const auto& step : result.steps) {
            std::cout << "  d0=" << step.d0 << "  statistic=" << step.statistic;
            if (std::isfinite(step.p_value))
                std::cout << "  p=" << step.p_value
                          << (step.rejected ? "  [rejected]" : "  [not rejected]");
            std::cout << "\n";
        }
        for (const auto& w : result.warnings)
            std::cout << "warning: " << w << "\n";
        return 0;
    }
};

// ------------------------------------------------------------ simulate

struct SimulateCmd {
    std::string design = "poisson-forward";
    std::vector<int> n_list = {25, 50, 100, 200, 400};
    int replicates = 20;
    int n_e = 200;
    std::string out_path = "simulation.csv";
    ConfigArgs config;

    int run() {
        const SimDesign d = design_from_name(design);
        MadeConfig cfg = config.build();
        const std::uint64_t seed = cfg.seed ? cfg.seed : 1;
        const bool prediction = design.size() > 5 &&
                                design.substr(design.size() - 5) == "-pred";
        std::vector<std::vector<std::string>> rows;
        std::vector<std::string> header;
        if (!prediction) {
            header = {"design", "n", "replicate", "rho", "ok", "note"};
            for (const int n : n_list) {
                const auto table = run_distance_experiment(
                    d, {n}, replicates, cfg, seed + static_cast<std::uint64_t>(n),
                    cfg.threads);
                for (const auto& row : table)
                    rows.push_back({row.design, std::to_string(row.n),
                                    std::to_string(row.replicate),
                                    format_double(row.rho),
                                    row.ok ? "1" : "0", row.note});
            }
        } else {
            header = {"design", "n", "replicate", "predictor", "error", "ok",
                      "note"};
            for (const int n : n_list) {
                const auto table = run_prediction_experiment(
                    d, n, n_e, replicates, cfg,
                    seed + static_cast<std::uint64_t>(n), cfg.threads);
                for (const auto& row : table)
                    rows.push_back({row.design, std::to_string(row.n),
                                    std::to_string(row.replicate), row.predictor,
                                    format_double(row.error),
                                    row.ok ? "1" : "0", row.note});
            }
        }
        write_csv(out_path, header, rows);

        std::string config_string = design + "|reps=" +
                                    std::to_string(replicates) +
                                    "|seed=" + std::to_string(seed);
        for (const int n : n_list) config_string += "|n=" + std::to_string(n);
        nlohmann::json manifest;
        manifest["design"] = design;
        manifest["replicates"] = replicates;
        manifest["n"] = n_list;
        if (prediction) manifest["n_e"] = n_e;
        manifest["seed"] = seed;
        manifest["config_hash"] = fnv1a(config_string);
        manifest["rows"] = rows.size();
        std::ofstream mout(out_path + ".manifest.json");
        mout << manifest.dump(2) << "\n";
        std::cout << "wrote " << rows.size() << " rows to " << out_path << "\n";
        return 0;
    }
};

// ------------------------------------------------------- flea workflow

struct FleaCmd {
    std::string data_path, out_prefix = "flea";
    std::string species_column = "species";
    ConfigArgs config;

    struct SubsetFit {
        MadeFit fit;
        Eigen::VectorXd centers, scales;
        int n = 0;
    };

    SubsetFit fit_pair(const CsvTable& table,
                       const std::vector<std::string>& predictors,
                       const std::string& success_class,
                       const std::string& other_class) {
        const int scol = table.column_index(species_column);
        std::vector<int> keep;
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            const std::string& s = table.cell(static_cast<int>(r), scol);
            if (s == success_class || s == other_class)
                keep.push_back(static_cast<int>(r));
        }
        if (keep.size() < 4)
            throw DataError("classes '" + success_class + "'/'" + other_class +
                            "' have too few rows");

        Dataset data;
        const int n = static_cast<int>(keep.size());
        const int p = static_cast<int>(predictors.size());
        data.y.resize(n);
        data.X.resize(n, p);
        for (int k = 0; k < n; ++k) {
            data.y(k) =
                table.cell(keep[k], scol) == success_class ? 1.0 : 0.0;
            for (int c = 0; c < p; ++c) {
                const int col = table.column_index(predictors[c]);
                data.X(k, c) = std::stod(table.cell(keep[k], col));
            }
        }
        SubsetFit out;
        out.n = n;
        out.centers.resize(p);
        out.scales.resize(p);
        for (int c = 0; c < p; ++c) {
            const double mean = data.X.col(c).mean();
            const double sd = std::sqrt(
                (data.X.col(c).array() - mean).square().sum() / (n - 1));
            if (!(sd > 0.0))
                throw DataError("constant predictor '" + predictors[c] + "'");
            out.centers(c) = mean;
            out.scales(c) = sd;
            data.X.col(c) = (data.X.col(c).array() - mean) / sd;
        }

        MadeConfig cfg = config.build();
        cfg.d = 1;
        out.fit = fit(Family::binomial(), data, cfg);
        return out;
    }

    int run() {
        const CsvTable table = read_csv(data_path);
        if (table.column_index(species_column) < 0)
            throw DataError("species column '" + species_column + "' not found");

        std::vector<std::string> predictors;
        for (const auto& col : table.columns)
            if (col != species_column) predictors.push_back(col);

        const SubsetFit fit1 =
            fit_pair(table, predictors, "concinna", "heptapotamica");
        const SubsetFit fit2 =
            fit_pair(table, predictors, "concinna", "heikertingeri");

        std::cout << "fit 1 (concinna vs heptapotamica), n=" << fit1.n << ":\n";
        print_basis_table(predictors, fit1.fit.B, std::cout);
        std::cout << "\nfit 2 (concinna vs heikertingeri), n=" << fit2.n
                  << ":\n";
        print_basis_table(predictors, fit2.fit.B, std::cout);

        // Reduction pair for every observation, each on its own fit's scale.
        const int scol = table.column_index(species_column);
        std::vector<std::vector<std::string>> rows;
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            Eigen::VectorXd x(predictors.size());
            for (std::size_t c = 0; c < predictors.size(); ++c)
                x(c) = std::stod(
                    table.cell(static_cast<int>(r),
                               table.column_index(predictors[c])));
            const double r1 =
                (((x - fit1.centers).array() / fit1.scales.array()).matrix())
                    .dot(fit1.fit.B.col(0));
            const double r2 =
                (((x - fit2.centers).array() / fit2.scales.array()).matrix())
                    .dot(fit2.fit.B.col(0));
            rows.push_back({format_double(r1), format_double(r2),
                            table.cell(static_cast<int>(r), scol)});
        }
        write_csv(out_prefix + "_reductions.csv",
                  {"reduction1", "reduction2", "species"}, rows);

        for (int which = 1; which <= 2; ++which) {
            const SubsetFit& sf = which == 1 ? fit1 : fit2;
            FitDocument doc = make_document(Family::binomial(), config.build(),
                                            sf.fit);
            doc.response = "is_concinna";
            doc.predictors = predictors;
            doc.standardized = true;
            doc.centers = sf.centers;
            doc.scales = sf.scales;
            save_fit(out_prefix + "_fit" + std::to_string(which) + ".json", doc);
        }
        std::cout << "\nwrote " << rows.size() << " rows to " << out_prefix
                  << "_reductions.csv\n";
        return 0;
    }
};

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Minimum average deviance estimation for sufficient "
                 "dimension reduction"};
    app.set_config("--config", "", "key=value configuration file");
    app.require_subcommand(1);

    FitCmd fit_cmd;
    auto* fit_sub = app.add_subcommand("fit", "fit a reduction to a CSV dataset");
    fit_sub->add_option("--data", fit_cmd.data_path, "training CSV")->required();
    fit_sub->add_option("--out", fit_cmd.out_path, "fit JSON output path");
    fit_sub->add_option("--trace", fit_cmd.trace_path, "objective trace CSV");
    fit_cmd.family.add_options(fit_sub);
    fit_cmd.schema.add_options(fit_sub);
    fit_cmd.config.add_options(fit_sub);

    PredictCmd predict_cmd;
    auto* predict_sub =
        app.add_subcommand("predict", "predict new points from a saved fit");
    predict_sub->add_option("--fit", predict_cmd.fit_path, "fit JSON")->required();
    predict_sub->add_option("--data", predict_cmd.data_path, "training CSV")
        ->required();
    predict_sub->add_option("--newdata", predict_cmd.newdata_path,
                            "CSV of points to predict")
        ->required();
    predict_sub->add_option("--out", predict_cmd.out_path, "prediction CSV")
        ->required();
    predict_sub->add_option("--predictor", predict_cmd.predictor,
                            "nw, ll1, or ll2")
        ->check(CLI::IsMember({"nw", "ll1", "ll2"}));
    predict_sub->add_flag("--allow-unconverged", predict_cmd.allow_unconverged,
                          "predict from a non-converged fit");

    DimensionCmd dim_cmd;
    auto* dim_sub =
        app.add_subcommand("dimension", "estimate the reduction dimension");
    dim_sub->add_option("--data", dim_cmd.data_path, "training CSV")->required();
    dim_sub->add_option("--method", dim_cmd.method,
                        "permutation, bootstrap, or cv")
        ->check(CLI::IsMember({"permutation", "bootstrap", "cv"}));
    dim_sub->add_option("--level", dim_cmd.options.level, "test level");
    dim_sub->add_option("--replicates", dim_cmd.replicates,
                        "permutation/bootstrap replicates");
    dim_sub->add_option("--kfolds", dim_cmd.options.kfolds, "CV folds");
    dim_sub->add_option("--summary", dim_cmd.summary,
                        "loading summary: mean or meanabs")
        ->check(CLI::IsMember({"mean", "meanabs"}));
    dim_sub->add_option("--cv-predictor", dim_cmd.cv_predictor,
                        "CV predictor: nw, ll1, ll2")
        ->check(CLI::IsMember({"nw", "ll1", "ll2"}));
    dim_sub->add_option("--cv-loss", dim_cmd.cv_loss,
                        "CV loss: squared, absolute, misclass")
        ->check(CLI::IsMember({"squared", "absolute", "misclass"}));
    dim_sub->add_option("--out-prefix", dim_cmd.out_prefix,
                        "output prefix for .csv/.json");
    dim_cmd.family.add_options(dim_sub);
    dim_cmd.schema.add_options(dim_sub);
    dim_cmd.config.add_options(dim_sub);

    SimulateCmd sim_cmd;
    auto* sim_sub = app.add_subcommand("simulate", "run simulation studies");
    sim_sub->add_option("--design", sim_cmd.design,
                        "binomial-inverse, gaussian-forward, poisson-forward, "
                        "binomial-pred, gaussian-pred, poisson-pred");
    sim_sub->add_option("--n", sim_cmd.n_list, "sample sizes")->delimiter(',');
    sim_sub->add_option("--reps", sim_cmd.replicates, "replicates per n");
    sim_sub->add_option("--ne", sim_cmd.n_e, "test-set size (prediction designs)");
    sim_sub->add_option("--out", sim_cmd.out_path, "output CSV path");
    sim_cmd.config.add_options(sim_sub);

    FleaCmd flea_cmd;
    auto* flea_sub = app.add_subcommand(
        "flea-workflow", "two binomial fits separating the flea species");
    flea_sub->add_option("--data", flea_cmd.data_path, "flea CSV")->required();
    flea_sub->add_option("--out-prefix", flea_cmd.out_prefix, "output prefix");
    flea_sub->add_option("--species-column", flea_cmd.species_column,
                         "categorical response column");
    flea_cmd.config.add_options(flea_sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (fit_sub->parsed()) return fit_cmd.run();
        if (predict_sub->parsed()) return predict_cmd.run();
        if (dim_sub->parsed()) return dim_cmd.run();
        if (sim_sub->parsed()) return sim_cmd.run();
        if (flea_sub->parsed()) return flea_cmd.run();
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const SupportError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}

}  // namespace made
