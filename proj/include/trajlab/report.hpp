#pragma once

#include <map>
#include <string>
#include <vector>

#include "trajlab/sweep.hpp"

namespace trajlab {

// Fixed sweep-record CSV schema. Unused hyperparameters stay empty.
extern const char* const kCsvHeader;

std::string format_number(double v);
std::string csv_row(const SweepRecord& rec);
void write_records_csv(const std::vector<SweepRecord>& records,
                       const std::string& path);

// Loosely typed CSV table for the pareto/plot pipeline.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    int column_index(const std::string& name) const;  // -1 when absent
    double numeric(int row, int col) const;           // ConfigError on bad cell
};

CsvTable read_csv(const std::string& path);
void write_csv(const CsvTable& table, const std::string& path);

struct PlotOptions {
    std::string x_column = "context_mean";
    std::string y_column = "fidelity_mean";
    int width = 720;
    int height = 480;
};

// Standalone SVG scatter of the record table: one circle per row, colored by
// the strategy column, optional front polyline, labeled axes.
std::string render_scatter_svg(const CsvTable& records, const CsvTable* front,
                               const PlotOptions& options);

}  // namespace trajlab
