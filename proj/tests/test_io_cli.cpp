#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "made/cli.hpp"
#include "made/csv.hpp"
#include "made/errors.hpp"
#include "made/fit_io.hpp"
#include "made/rng.hpp"

using namespace made;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("made_test_" + std::to_string(Rng(::getpid()).raw()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const {
        return (path / name).string();
    }
};

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv = {"made"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

// Synthetic single-index training table.
std::string synth_csv(int n, unsigned seed) {
    Rng rng(seed);
    std::ostringstream os;
    os << "y,x1,x2,x3\n";
    for (int i = 0; i < n; ++i) {
        const double x1 = rng.normal(), x2 = rng.normal(), x3 = rng.normal();
        const double t = 0.8 * x1 - 0.6 * x2;
        os << format_double(std::sin(t) + 0.5 * t + 0.1 * rng.normal()) << ","
           << format_double(x1) << "," << format_double(x2) << ","
           << format_double(x3) << "\n";
    }
    return os.str();
}

}  // namespace

TEST_CASE("csv ingestion") {
    TempDir dir;
    SUBCASE("missing values are reported with row numbers") {
        write_file(dir.file("m.csv"), "y,x\n1,2\n,3\n4,NA\n5,6\n");
        DatasetSchema schema;
        schema.response = "y";
        try {
            ingest_csv(dir.file("m.csv"), schema);
            FAIL("expected a data error");
        } catch (const DataError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("2") != std::string::npos);
            CHECK(msg.find("3") != std::string::npos);
        }
    }
    SUBCASE("non-numeric predictors raise a parse error") {
        write_file(dir.file("p.csv"), "y,x\n1,2\n3,abc\n");
        DatasetSchema schema;
        schema.response = "y";
        schema.predictors = {"x"};
        CHECK_THROWS_AS(ingest_csv(dir.file("p.csv"), schema), DataError);
    }
    SUBCASE("empty file raises") {
        write_file(dir.file("e.csv"), "");
        CHECK_THROWS_AS(read_csv(dir.file("e.csv")), DataError);
    }
    SUBCASE("trials column populates the binomial context") {
        write_file(dir.file("t.csv"), "y,x,m\n1,0.5,2\n0,1.5,3\n2,2.5,4\n");
        DatasetSchema schema;
        schema.response = "y";
        schema.predictors = {"x"};
        schema.trials_column = "m";
        const IngestResult res = ingest_csv(dir.file("t.csv"), schema);
        REQUIRE(res.data.trials.size() == 3);
        CHECK(res.data.trial(1) == 3.0);
        // a_i = 1/m_i for the binomial family at unit dispersion
        CHECK(Family::binomial().a_scale(1.0, res.data.trial(2)) ==
              doctest::Approx(0.25));
    }
    SUBCASE("auto-selected predictors skip string columns") {
        write_file(dir.file("s.csv"), "y,x,label\n1,2,a\n3,4,b\n");
        DatasetSchema schema;
        schema.response = "y";
        const IngestResult res = ingest_csv(dir.file("s.csv"), schema);
        REQUIRE(res.predictor_names.size() == 1);
        CHECK(res.predictor_names[0] == "x");
    }
    SUBCASE("standardization centers and scales") {
        write_file(dir.file("z.csv"), "y,x\n1,2\n2,4\n3,6\n");
        DatasetSchema schema;
        schema.response = "y";
        schema.predictors = {"x"};
        schema.standardize = true;
        const IngestResult res = ingest_csv(dir.file("z.csv"), schema);
        CHECK(res.data.X.col(0).mean() == doctest::Approx(0.0));
        CHECK(res.centers(0) == doctest::Approx(4.0));
        CHECK(res.scales(0) == doctest::Approx(2.0));
    }
}

TEST_CASE("fit document json round trip") {
    FitDocument doc;
    doc.family = "poisson";
    doc.dispersion = 1.0;
    doc.d = 2;
    doc.bandwidth_c = 1.5;
    doc.bandwidth_h_override = 0.37;
    doc.response = "y";
    doc.predictors = {"a", "b", "c"};
    doc.standardized = true;
    doc.centers = Eigen::Vector3d(0.1, -0.2, 0.3);
    doc.scales = Eigen::Vector3d(1.0, 2.0, 3.0);
    doc.bandwidth_h = 0.37;
    doc.converged = true;
    doc.outer_iterations = 7;
    doc.objective = -123.4567890123456789;
    doc.B = Eigen::MatrixXd::Random(3, 2);
    doc.alpha = Eigen::VectorXd::Random(5);
    doc.gamma = Eigen::MatrixXd::Random(5, 2);
    doc.trace = {{1, 'x', -130.0, 0.0}, {1, 'B', -125.0, 0.2}};

    const FitDocument back = from_json_string(to_json_string(doc));
    CHECK(back.family == doc.family);
    CHECK(back.d == doc.d);
    CHECK(*back.bandwidth_h_override == *doc.bandwidth_h_override);
    CHECK(back.objective == doc.objective);  // bitwise via round-trip dump
    CHECK((back.B - doc.B).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((back.alpha - doc.alpha).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((back.gamma - doc.gamma).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(back.trace.size() == 2);
    CHECK(back.trace[1].phase == 'B');
}

TEST_CASE("cli fit, save, and predict round trip bit for bit") {
    TempDir dir;
    write_file(dir.file("train.csv"), synth_csv(80, 42));
    write_file(dir.file("new.csv"), synth_csv(15, 77));

    CHECK(run({"fit", "--data", dir.file("train.csv"), "--response", "y",
               "--family", "gaussian", "--d", "1", "--out", dir.file("fit.json"),
               "--outer-max-iter", "40", "--threads", "2"}) == 0);

    CHECK(run({"predict", "--fit", dir.file("fit.json"), "--data",
               dir.file("train.csv"), "--newdata", dir.file("new.csv"),
               "--predictor", "ll2", "--out", dir.file("p1.csv")}) == 0);
    CHECK(run({"predict", "--fit", dir.file("fit.json"), "--data",
               dir.file("train.csv"), "--newdata", dir.file("new.csv"),
               "--predictor", "ll2", "--out", dir.file("p2.csv")}) == 0);
    CHECK(read_file(dir.file("p1.csv")) == read_file(dir.file("p2.csv")));
    CHECK(read_file(dir.file("p1.csv")).find("prediction") != std::string::npos);
}

TEST_CASE("cli exit codes") {
    TempDir dir;
    SUBCASE("usage errors return 2") {
        CHECK(run({"fit"}) == 2);                       // missing --data
        CHECK(run({"frobnicate"}) == 2);                // unknown subcommand
    }
    SUBCASE("data errors return 3") {
        CHECK(run({"fit", "--data", dir.file("absent.csv"), "--response",
                   "y"}) == 3);
        write_file(dir.file("bad.csv"), "y,x\n1,a\n");
        CHECK(run({"fit", "--data", dir.file("bad.csv"), "--response", "y",
                   "--predictors", "x"}) == 3);
    }
    SUBCASE("dimension larger than p returns 2") {
        write_file(dir.file("train.csv"), synth_csv(30, 1));
        CHECK(run({"fit", "--data", dir.file("train.csv"), "--response", "y",
                   "--d", "9"}) == 2);
    }
}

TEST_CASE("cli simulate is deterministic") {
    TempDir dir;
    const std::vector<std::string> args = {
        "simulate", "--design", "binomial-inverse", "--n", "30", "--reps", "2",
        "--seed", "7", "--outer-max-iter", "4", "--out", dir.file("sim.csv")};
    CHECK(run(args) == 0);
    const std::string first = read_file(dir.file("sim.csv"));
    CHECK(run(args) == 0);
    CHECK(read_file(dir.file("sim.csv")) == first);
    CHECK(first.find("rho") != std::string::npos);
}

TEST_CASE("cli dimension writes records and a summary") {
    TempDir dir;
    write_file(dir.file("train.csv"), synth_csv(70, 5));
    CHECK(run({"dimension", "--data", dir.file("train.csv"), "--response", "y",
               "--family", "gaussian", "--method", "permutation",
               "--replicates", "30", "--seed", "3", "--threads", "2",
               "--outer-max-iter", "5", "--no-standardize", "--out-prefix",
               dir.file("dim")}) == 0);
    const std::string csv = read_file(dir.file("dim.csv"));
    CHECK(csv.find("p_value") != std::string::npos);
    const std::string json = read_file(dir.file("dim.json"));
    CHECK(json.find("d_hat") != std::string::npos);
}

TEST_CASE("cli flea workflow runs on a surrogate table") {
    // Synthetic stand-in with the real column layout; the published-data
    // checks live in the acceptance suite and are skipped without the file.
    TempDir dir;
    Rng rng(9);
    std::ostringstream os;
    os << "tars1,tars2,head,aede1,aede2,aede3,species\n";
    const std::vector<std::string> species = {"concinna", "heptapotamica",
                                              "heikertingeri"};
    for (int i = 0; i < 60; ++i) {
        const int cls = i % 3;
        for (int j = 0; j < 6; ++j) {
            const double shift = (j == 0 || j == 4) ? 2.0 * cls : -1.5 * cls;
            os << format_double(shift + rng.normal()) << ",";
        }
        os << species[cls] << "\n";
    }
    write_file(dir.file("flea.csv"), os.str());
    CHECK(run({"flea-workflow", "--data", dir.file("flea.csv"), "--out-prefix",
               dir.file("flea"), "--outer-max-iter", "6", "--threads", "2"}) == 0);
    const CsvTable out = read_csv(dir.file("flea") + "_reductions.csv");
    CHECK(out.rows.size() == 60);
    CHECK(out.columns.size() == 3);
    CHECK(fs::exists(dir.file("flea") + "_fit1.json"));
    CHECK(fs::exists(dir.file("flea") + "_fit2.json"));
}
