#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "made/dataset.hpp"

namespace made {

// Rectangular CSV with a header row; cells kept as raw strings.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    int column_index(const std::string& name) const;  // -1 when absent
    const std::string& cell(int row, int col) const { return rows[row][col]; }
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::string format_double(double v);  // round-trip formatting

struct DatasetSchema {
    std::string response;
    std::vector<std::string> predictors;  // empty: all other numeric columns
    std::string trials_column;            // optional
    std::string offset_column;            // optional
    bool standardize = false;             // center/scale predictors
};

struct IngestResult {
    Dataset data;
    std::vector<std::string> predictor_names;
    Eigen::VectorXd centers;  // standardization actually applied
    Eigen::VectorXd scales;
};

IngestResult ingest_csv(const CsvTable& table, const DatasetSchema& schema);
IngestResult ingest_csv(const std::string& path, const DatasetSchema& schema);

}  // namespace made
