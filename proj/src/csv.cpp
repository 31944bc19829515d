#include "made/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "made/errors.hpp"

namespace made {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    fields.push_back(field);
    return fields;
}

bool missing_cell(const std::string& s) {
    return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan" ||
           s == "?";
}

double parse_number(const std::string& s, const std::string& column, int row) {
    double value = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr != end)
        throw DataError("column '" + column + "', row " + std::to_string(row + 1) +
                        ": cannot parse '" + s + "' as a number");
    return value;
}

bool numeric_cell(const std::string& s) {
    double value = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
    const auto res = std::from_chars(begin, end, value);
    return res.ec == std::errc() && res.ptr == end && begin < end;
}

}  // namespace

int CsvTable::column_index(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    return it == columns.end() ? -1
                               : static_cast<int>(it - columns.begin());
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    CsvTable table;
    std::string line;
    if (!std::getline(in, line) || line.empty())
        throw DataError("'" + path + "': empty file or missing header");
    table.columns = split_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (fields.size() != table.columns.size())
            throw DataError("'" + path + "': row " +
                            std::to_string(table.rows.size() + 1) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(table.columns.size()));
        table.rows.push_back(std::move(fields));
    }
    return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    for (std::size_t c = 0; c < header.size(); ++c)
        out << header[c] << (c + 1 < header.size() ? "," : "\n");
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c)
            out << row[c] << (c + 1 < row.size() ? "," : "\n");
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

IngestResult ingest_csv(const CsvTable& table, const DatasetSchema& schema) {
    const int rcol = table.column_index(schema.response);
    if (rcol < 0)
        throw DataError("response column '" + schema.response + "' not found");

    std::vector<std::string> names = schema.predictors;
    if (names.empty()) {
        for (const auto& col : table.columns) {
            if (col == schema.response || col == schema.trials_column ||
                col == schema.offset_column)
                continue;
            // Auto-selection keeps only fully numeric columns.
            bool numeric = !table.rows.empty();
            for (const auto& row : table.rows)
                if (!missing_cell(row[table.column_index(col)]) &&
                    !numeric_cell(row[table.column_index(col)])) {
                    numeric = false;
                    break;
                }
            if (numeric) names.push_back(col);
        }
        if (names.empty()) throw DataError("no numeric predictor columns found");
    }

    std::vector<int> pcols;
    for (const auto& name : names) {
        const int c = table.column_index(name);
        if (c < 0) throw DataError("predictor column '" + name + "' not found");
        pcols.push_back(c);
    }
    const int tcol = schema.trials_column.empty()
                         ? -1
                         : table.column_index(schema.trials_column);
    if (!schema.trials_column.empty() && tcol < 0)
        throw DataError("trials column '" + schema.trials_column + "' not found");
    const int ocol = schema.offset_column.empty()
                         ? -1
                         : table.column_index(schema.offset_column);
    if (!schema.offset_column.empty() && ocol < 0)
        throw DataError("offset column '" + schema.offset_column + "' not found");

    // Missing values are a row-level error listing every offending row.
    std::vector<int> bad_rows;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        bool bad = missing_cell(table.rows[r][rcol]);
        for (const int c : pcols) bad = bad || missing_cell(table.rows[r][c]);
        if (tcol >= 0) bad = bad || missing_cell(table.rows[r][tcol]);
        if (ocol >= 0) bad = bad || missing_cell(table.rows[r][ocol]);
        if (bad) bad_rows.push_back(static_cast<int>(r) + 1);
    }
    if (!bad_rows.empty()) {
        std::string msg = "missing values in row(s):";
        for (const int r : bad_rows) msg += " " + std::to_string(r);
        throw DataError(msg);
    }

    const int n = static_cast<int>(table.rows.size());
    const int p = static_cast<int>(pcols.size());
    if (n == 0) throw DataError("no data rows");

    IngestResult out;
    out.predictor_names = names;
    out.data.y.resize(n);
    out.data.X.resize(n, p);
    if (tcol >= 0) out.data.trials.resize(n);
    if (ocol >= 0) out.data.offsets.resize(n);
    for (int r = 0; r < n; ++r) {
        out.data.y(r) = parse_number(table.rows[r][rcol], schema.response, r);
        for (int c = 0; c < p; ++c)
            out.data.X(r, c) = parse_number(table.rows[r][pcols[c]], names[c], r);
        if (tcol >= 0)
            out.data.trials(r) =
                parse_number(table.rows[r][tcol], schema.trials_column, r);
        if (ocol >= 0)
            out.data.offsets(r) =
                parse_number(table.rows[r][ocol], schema.offset_column, r);
    }

    out.centers = Eigen::VectorXd::Zero(p);
    out.scales = Eigen::VectorXd::Ones(p);
    if (schema.standardize) {
        for (int c = 0; c < p; ++c) {
            const double mean = out.data.X.col(c).mean();
            const double ss = (out.data.X.col(c).array() - mean).square().sum();
            const double sd = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
            if (!(sd > 0.0))
                throw DataError("predictor '" + names[c] +
                                "' is constant; cannot standardize");
            out.centers(c) = mean;
            out.scales(c) = sd;
            out.data.X.col(c) = (out.data.X.col(c).array() - mean) / sd;
        }
    }
    return out;
}

IngestResult ingest_csv(const std::string& path, const DatasetSchema& schema) {
    return ingest_csv(read_csv(path), schema);
}

}  // namespace made
