#include "trajlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "trajlab/errors.hpp"

namespace trajlab {

const char* const kCsvHeader =
    "strategy,omega_c,omega_s,t_sw,q,r,variant,condition,n_samples,steps,seed,"
    "fidelity_mean,fidelity_std,context_mean,context_std,calls_per_sample,wall_ms";

std::string format_number(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

namespace {

std::string param_cell(const std::map<std::string, double>& params,
                       const std::string& name) {
    auto it = params.find(name);
    return it == params.end() ? std::string() : format_number(it->second);
}

}  // namespace

std::string csv_row(const SweepRecord& rec) {
    // The single-scale strategies report omega in the cell of the delta they
    // drive: base -> omega_c, superclass -> omega_s, switching -> both.
    std::string omega_c = param_cell(rec.params, "omega_c");
    std::string omega_s = param_cell(rec.params, "omega_s");
    if (auto it = rec.params.find("omega"); it != rec.params.end()) {
        const std::string omega = format_number(it->second);
        if (rec.strategy_kind == "base") omega_c = omega;
        else if (rec.strategy_kind == "superclass") omega_s = omega;
        else omega_c = omega_s = omega;
    }

    std::ostringstream out;
    out << rec.strategy_kind << ',' << omega_c << ',' << omega_s << ','
        << param_cell(rec.params, "t_sw") << ',' << param_cell(rec.params, "q")
        << ',' << param_cell(rec.params, "r") << ','
        << to_string(rec.superclass_source.first) << ','
        << to_string(rec.superclass_source.second) << ',' << rec.n_samples << ','
        << rec.steps << ',' << rec.seed << ','
        << format_number(rec.metrics.fidelity_mean) << ','
        << format_number(rec.metrics.fidelity_std) << ','
        << format_number(rec.metrics.context_mean) << ','
        << format_number(rec.metrics.context_std) << ','
        << rec.calls_per_sample << ',' << format_number(rec.wall_ms);
    return out.str();
}

void write_records_csv(const std::vector<SweepRecord>& records,
                       const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file: " + path);
    out << kCsvHeader << '\n';
    for (const auto& rec : records) out << csv_row(rec) << '\n';
}

int CsvTable::column_index(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
}

double CsvTable::numeric(int row, int col) const {
    const std::string& cell = rows[row][col];
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("non-numeric cell '" + cell + "' in column '" +
                          columns[col] + "' row " + std::to_string(row + 1));
    }
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open CSV file: " + path);

    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ss(line);
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        return cells;
    };

    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path + ": empty CSV file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    table.columns = split(line);
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != table.columns.size()) {
            throw ConfigError(path + ":" + std::to_string(line_no) +
                              ": expected " + std::to_string(table.columns.size()) +
                              " cells, got " + std::to_string(cells.size()));
        }
        table.rows.push_back(std::move(cells));
    }
    return table;
}

void write_csv(const CsvTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file: " + path);
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        out << (i ? "," : "") << table.columns[i];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "") << row[i];
        }
        out << '\n';
    }
}

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf"};

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_scatter_svg(const CsvTable& records, const CsvTable* front,
                               const PlotOptions& options) {
    if (records.rows.empty()) throw ConfigError("plot input has no data rows");
    const int xc = records.column_index(options.x_column);
    const int yc = records.column_index(options.y_column);
    if (xc < 0) throw ConfigError("missing column: " + options.x_column);
    if (yc < 0) throw ConfigError("missing column: " + options.y_column);
    const int strategy_col = records.column_index("strategy");

    struct Pt {
        double x, y;
        std::string series;
    };
    std::vector<Pt> pts;
    for (std::size_t r = 0; r < records.rows.size(); ++r) {
        Pt p{records.numeric(static_cast<int>(r), xc),
             records.numeric(static_cast<int>(r), yc),
             strategy_col >= 0 ? records.rows[r][strategy_col] : std::string("data")};
        pts.push_back(std::move(p));
    }

    std::vector<std::pair<double, double>> front_pts;
    if (front) {
        const int fx = front->column_index(options.x_column);
        const int fy = front->column_index(options.y_column);
        if (fx < 0 || fy < 0) {
            throw ConfigError("front CSV lacks column " + options.x_column + " or " +
                              options.y_column);
        }
        for (std::size_t r = 0; r < front->rows.size(); ++r) {
            front_pts.emplace_back(front->numeric(static_cast<int>(r), fx),
                                   front->numeric(static_cast<int>(r), fy));
        }
    }

    double xmin = pts[0].x, xmax = pts[0].x, ymin = pts[0].y, ymax = pts[0].y;
    for (const auto& p : pts) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    if (xmax == xmin) { xmin -= 0.5; xmax += 0.5; }
    if (ymax == ymin) { ymin -= 0.5; ymax += 0.5; }
    const double xpad = 0.05 * (xmax - xmin);
    const double ypad = 0.05 * (ymax - ymin);
    xmin -= xpad; xmax += xpad; ymin -= ypad; ymax += ypad;

    const double ml = 70, mr = 20, mt = 20, mb = 55;
    const double pw = options.width - ml - mr;
    const double ph = options.height - mt - mb;
    auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double y) { return mt + (ymax - y) / (ymax - ymin) * ph; };

    std::vector<std::string> series;
    for (const auto& p : pts) {
        if (std::find(series.begin(), series.end(), p.series) == series.end()) {
            series.push_back(p.series);
        }
    }
    auto color_of = [&](const std::string& s) {
        const auto idx = std::find(series.begin(), series.end(), s) - series.begin();
        return kPalette[idx % (sizeof(kPalette) / sizeof(kPalette[0]))];
    };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width
        << "\" height=\"" << options.height << "\" viewBox=\"0 0 "
        << options.width << " " << options.height << "\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << options.width << "\" height=\""
        << options.height << "\" fill=\"white\"/>\n";

    // axes
    svg << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw
        << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
        << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double fx = xmin + (xmax - xmin) * k / 4.0;
        const double fy = ymin + (ymax - ymin) * k / 4.0;
        svg << "<text x=\"" << sx(fx) << "\" y=\"" << mt + ph + 18
            << "\" font-size=\"11\" text-anchor=\"middle\">" << format_number(fx)
            << "</text>\n"
            << "<text x=\"" << ml - 8 << "\" y=\"" << sy(fy) + 4
            << "\" font-size=\"11\" text-anchor=\"end\">" << format_number(fy)
            << "</text>\n";
    }
    svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << options.height - 12
        << "\" font-size=\"13\" text-anchor=\"middle\">"
        << xml_escape(options.x_column) << "</text>\n"
        << "<text x=\"16\" y=\"" << mt + ph / 2
        << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << mt + ph / 2 << ")\">" << xml_escape(options.y_column) << "</text>\n";

    if (!front_pts.empty()) {
        svg << "<polyline fill=\"none\" stroke=\"#444444\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < front_pts.size(); ++i) {
            svg << (i ? " " : "") << sx(front_pts[i].first) << ','
                << sy(front_pts[i].second);
        }
        svg << "\"/>\n";
    }

    for (const auto& p : pts) {
        svg << "<circle cx=\"" << sx(p.x) << "\" cy=\"" << sy(p.y)
            << "\" r=\"3.5\" fill=\"" << color_of(p.series) << "\"/>\n";
    }

    // legend
    double ly = mt + 10;
    for (const auto& s : series) {
        svg << "<rect x=\"" << ml + pw - 120 << "\" y=\"" << ly - 8
            << "\" width=\"10\" height=\"10\" fill=\"" << color_of(s) << "\"/>\n"
            << "<text x=\"" << ml + pw - 105 << "\" y=\"" << ly + 1
            << "\" font-size=\"11\">" << xml_escape(s) << "</text>\n";
        ly += 16;
    }

    svg << "</svg>\n";
    return svg.str();
}

}  // namespace trajlab
