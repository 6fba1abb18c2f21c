#include "pmmh/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pmmh/errors.hpp"

namespace pmmh {

namespace {

std::string trimmed(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trimmed(cell));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_cell(const std::string& cell, long row, const std::string& column) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &used);
    } catch (const std::exception&) {
        throw ConfigError("row " + std::to_string(row) + ", column '" + column +
                          "': cannot parse '" + cell + "' as a number");
    }
    if (used != cell.size())
        throw ConfigError("row " + std::to_string(row) + ", column '" + column +
                          "': trailing characters in '" + cell + "'");
    if (!std::isfinite(v))
        throw ConfigError("row " + std::to_string(row) + ", column '" + column +
                          "': non-finite value");
    return v;
}

std::string full_precision(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

const std::vector<double>& Dataset::covariate(const std::string& name) const {
    for (std::size_t i = 0; i < covariate_names.size(); ++i)
        if (covariate_names[i] == name) return covariates[i];
    throw ConfigError("dataset has no column named '" + name + "'");
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open dataset file '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw ConfigError("dataset '" + path + "' is empty");
    std::vector<std::string> header = split_csv(line);
    long y_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i].empty()) throw ConfigError("dataset '" + path + "' has an unnamed column");
        if (header[i] == "y") y_col = static_cast<long>(i);
    }
    if (y_col < 0) throw ConfigError("dataset '" + path + "' has no 'y' column");

    Dataset data;
    for (const auto& name : header) {
        if (name == "y") continue;
        data.covariate_names.push_back(name);
        data.covariates.emplace_back();
    }

    long row = 1;
    while (std::getline(in, line)) {
        if (trimmed(line).empty()) continue;
        std::vector<std::string> cells = split_csv(line);
        if (cells.size() != header.size())
            throw ConfigError("row " + std::to_string(row) + " of '" + path + "' has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(header.size()));
        std::size_t cov = 0;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            double v = parse_cell(cells[i], row, header[i]);
            if (static_cast<long>(i) == y_col)
                data.y.push_back(v);
            else
                data.covariates[cov++].push_back(v);
        }
        ++row;
    }
    if (data.y.empty()) throw ConfigError("dataset '" + path + "' has no data rows");
    return data;
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write dataset file '" + path + "'");
    out << "y";
    for (const auto& name : data.covariate_names) out << "," << name;
    out << "\n";
    for (std::size_t t = 0; t < data.y.size(); ++t) {
        out << full_precision(data.y[t]);
        for (const auto& col : data.covariates) out << "," << full_precision(col[t]);
        out << "\n";
    }
}

void require_counts(const Dataset& data) {
    for (std::size_t t = 0; t < data.y.size(); ++t) {
        double v = data.y[t];
        if (v < 0.0 || std::floor(v) != v)
            throw ConfigError("count model needs nonnegative integer observations; row " +
                              std::to_string(t + 1) + " has y = " + full_precision(v));
    }
}

void write_draws_csv(const std::string& path, const RunRecord& record) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write draws file '" + path + "'");
    for (const auto& name : record.names) out << name << ",";
    out << "loglik,logprior,accepted\n";
    for (long i = 0; i < record.draws.rows(); ++i) {
        for (long c = 0; c < record.draws.cols(); ++c) out << full_precision(record.draws(i, c)) << ",";
        out << full_precision(record.loglik[i]) << "," << full_precision(record.logprior[i]) << ","
            << (record.accepted[i] ? 1 : 0) << "\n";
    }
}

namespace {

constexpr double kWidth = 720.0, kHeight = 360.0, kMargin = 45.0;

struct Scale {
    double lo, hi;
    double map(double v, double out_lo, double out_hi) const {
        double span = hi - lo;
        if (span <= 0.0) span = 1.0;
        return out_lo + (v - lo) / span * (out_hi - out_lo);
    }
};

Scale value_scale(const std::vector<double>& v) {
    double lo = *std::min_element(v.begin(), v.end());
    double hi = *std::max_element(v.begin(), v.end());
    if (lo == hi) {
        lo -= 0.5;
        hi += 0.5;
    }
    return {lo, hi};
}

std::ofstream open_svg(const std::string& path, const std::string& title) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write plot file '" + path + "'");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\" "
        << "font-family=\"sans-serif\">" << title << "</text>\n";
    return out;
}

void close_svg(std::ofstream& out, const Scale& ys) {
    char lo[32], hi[32];
    std::snprintf(lo, sizeof lo, "%.4g", ys.lo);
    std::snprintf(hi, sizeof hi, "%.4g", ys.hi);
    out << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\""
        << kWidth - kMargin << "\" y2=\"" << kHeight - kMargin
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n"
        << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin
        << "\" y2=\"" << kHeight - kMargin << "\" stroke=\"black\" stroke-width=\"1\"/>\n"
        << "<text x=\"5\" y=\"" << kHeight - kMargin
        << "\" font-size=\"11\" font-family=\"sans-serif\">" << lo << "</text>\n"
        << "<text x=\"5\" y=\"" << kMargin + 4
        << "\" font-size=\"11\" font-family=\"sans-serif\">" << hi << "</text>\n"
        << "</svg>\n";
}

std::string polyline(const std::vector<double>& v, const Scale& ys) {
    std::string pts;
    Scale xs{0.0, static_cast<double>(v.size() - 1)};
    char buf[64];
    for (std::size_t i = 0; i < v.size(); ++i) {
        double x = xs.map(static_cast<double>(i), kMargin, kWidth - kMargin);
        double y = ys.map(v[i], kHeight - kMargin, kMargin);
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", x, y);
        pts += buf;
    }
    return pts;
}

}  // namespace

void write_trace_svg(const std::string& path, const std::vector<double>& values,
                     const std::string& title) {
    if (values.size() < 2) throw ConfigError("trace plot needs at least two values");
    Scale ys = value_scale(values);
    std::ofstream out = open_svg(path, title);
    out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"0.8\" points=\""
        << polyline(values, ys) << "\"/>\n";
    close_svg(out, ys);
}

void write_histogram_svg(const std::string& path, const std::vector<double>& values, int bins,
                         const std::string& title) {
    if (values.size() < 2 || bins < 1) throw ConfigError("histogram needs data and bins");
    Scale xs = value_scale(values);
    std::vector<long> counts(bins, 0);
    for (double v : values) {
        int b = static_cast<int>((v - xs.lo) / (xs.hi - xs.lo) * bins);
        b = std::clamp(b, 0, bins - 1);
        ++counts[b];
    }
    long peak = *std::max_element(counts.begin(), counts.end());
    std::ofstream out = open_svg(path, title);
    double w = (kWidth - 2 * kMargin) / bins;
    for (int b = 0; b < bins; ++b) {
        double h = (kHeight - 2 * kMargin) * static_cast<double>(counts[b]) /
                   static_cast<double>(peak);
        out << "<rect x=\"" << kMargin + b * w << "\" y=\"" << kHeight - kMargin - h
            << "\" width=\"" << w * 0.92 << "\" height=\"" << h
            << "\" fill=\"steelblue\"/>\n";
    }
    close_svg(out, {0.0, static_cast<double>(peak)});
}

void write_band_svg(const std::string& path, const std::vector<double>& center,
                    const std::vector<double>& lower, const std::vector<double>& upper,
                    const std::string& title) {
    if (center.size() < 2 || lower.size() != center.size() || upper.size() != center.size())
        throw ConfigError("band plot needs equal-length center, lower, and upper series");
    std::vector<double> all = lower;
    all.insert(all.end(), upper.begin(), upper.end());
    Scale ys = value_scale(all);
    Scale xs{0.0, static_cast<double>(center.size() - 1)};

    std::string band;
    char buf[64];
    for (std::size_t i = 0; i < upper.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ",
                      xs.map(static_cast<double>(i), kMargin, kWidth - kMargin),
                      ys.map(upper[i], kHeight - kMargin, kMargin));
        band += buf;
    }
    for (std::size_t i = lower.size(); i-- > 0;) {
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ",
                      xs.map(static_cast<double>(i), kMargin, kWidth - kMargin),
                      ys.map(lower[i], kHeight - kMargin, kMargin));
        band += buf;
    }

    std::ofstream out = open_svg(path, title);
    out << "<polygon fill=\"lightsteelblue\" stroke=\"none\" points=\"" << band << "\"/>\n"
        << "<polyline fill=\"none\" stroke=\"navy\" stroke-width=\"1.2\" points=\""
        << polyline(center, ys) << "\"/>\n";
    close_svg(out, ys);
}

}  // namespace pmmh
