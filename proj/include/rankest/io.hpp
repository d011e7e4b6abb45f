#pragma once

// Text formats: scenario files, snapshot CSV, trace/sweep/table CSV writers
// and a minimal SVG line chart.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "rankest/doa_sim.hpp"
#include "rankest/error.hpp"
#include "rankest/linalg.hpp"

namespace rankest::io {

/// Shortest round-trip-safe text for 10 significant digits, locale independent.
inline std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 10);
    return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

/// Parses a whole field as a double; "nan"/"inf" accepted.
inline double parse_double(std::string_view s, std::size_t line, std::string_view what) {
    s = trim(s);
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ParseError("invalid number '" + std::string(s) + "' for " + std::string(what), line);
    }
    return v;
}

inline unsigned long long parse_unsigned(std::string_view s, std::size_t line, std::string_view what) {
    s = trim(s);
    unsigned long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ParseError("invalid integer '" + std::string(s) + "' for " + std::string(what), line);
    }
    return v;
}

// ---------------------------------------------------------------- scenario

/// Reads
///
///   [scenario]
///   n = 9
///   horizon = 1000
///   sampling_rate = 1
///   window = 45
///   sigma2 = 1
///   seed = 7
///
///   [signal]
///   t_on = 60
///   t_off = 1000
///   snr_db = -3
///   omega_path = 0:0.5, 1000:1.2
///
/// '#' starts a comment. Every [scenario] key is required; each [signal]
/// needs all four keys.
inline Scenario parse_scenario(std::istream& in) {
    Scenario sc;
    enum class Section { none, scenario, signal } section = Section::none;
    bool have_scenario = false;
    std::vector<std::string> seen_scenario_keys;
    std::vector<std::string> seen_signal_keys;
    std::size_t signal_line = 0;

    auto finish_signal = [&] {
        if (section != Section::signal) return;
        for (const char* k : {"t_on", "t_off", "snr_db", "omega_path"}) {
            if (std::find(seen_signal_keys.begin(), seen_signal_keys.end(), k) == seen_signal_keys.end()) {
                throw ParseError("[signal] is missing key '" + std::string(k) + "'", signal_line);
            }
        }
        try {
            sc.events.back().validate();
        } catch (const DomainError& e) {
            throw ParseError(e.what(), signal_line);
        }
    };

    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view s = raw;
        if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ParseError("unterminated section header", line);
            const auto name = trim(s.substr(1, s.size() - 2));
            finish_signal();
            if (name == "scenario") {
                if (have_scenario) throw ParseError("duplicate [scenario] section", line);
                have_scenario = true;
                section = Section::scenario;
            } else if (name == "signal") {
                section = Section::signal;
                sc.events.emplace_back();
                seen_signal_keys.clear();
                signal_line = line;
            } else {
                throw ParseError("unknown section [" + std::string(name) + "]", line);
            }
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line);
        const std::string key(trim(s.substr(0, eq)));
        const auto value = trim(s.substr(eq + 1));
        if (section == Section::none) throw ParseError("key '" + key + "' outside any section", line);

        auto& seen = section == Section::scenario ? seen_scenario_keys : seen_signal_keys;
        if (std::find(seen.begin(), seen.end(), key) != seen.end()) throw ParseError("duplicate key '" + key + "'", line);
        seen.push_back(key);

        if (section == Section::scenario) {
            if (key == "n") sc.n = parse_unsigned(value, line, key);
            else if (key == "horizon") sc.horizon = parse_double(value, line, key);
            else if (key == "sampling_rate") sc.sampling_rate = parse_double(value, line, key);
            else if (key == "window") sc.window = parse_unsigned(value, line, key);
            else if (key == "sigma2") sc.sigma2 = parse_double(value, line, key);
            else if (key == "seed") sc.seed = parse_unsigned(value, line, key);
            else throw ParseError("unknown [scenario] key '" + key + "'", line);
        } else {
            auto& ev = sc.events.back();
            if (key == "t_on") ev.t_on = parse_double(value, line, key);
            else if (key == "t_off") ev.t_off = parse_double(value, line, key);
            else if (key == "snr_db") ev.snr_db = parse_double(value, line, key);
            else if (key == "omega_path") {
                for (auto point : split(value, ',')) {
                    const auto colon = point.find(':');
                    if (colon == std::string_view::npos) throw ParseError("omega_path entries must be t:omega", line);
                    ev.omega_path.emplace_back(parse_double(point.substr(0, colon), line, "omega_path time"),
                                               parse_double(point.substr(colon + 1), line, "omega_path omega"));
                }
            } else {
                throw ParseError("unknown [signal] key '" + key + "'", line);
            }
        }
    }
    finish_signal();
    if (!have_scenario) throw ParseError("missing [scenario] section");
    for (const char* k : {"n", "horizon", "sampling_rate", "window", "sigma2", "seed"}) {
        if (std::find(seen_scenario_keys.begin(), seen_scenario_keys.end(), k) == seen_scenario_keys.end()) {
            throw ParseError("[scenario] is missing key '" + std::string(k) + "'");
        }
    }
    try {
        sc.validate();
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open scenario file '" + path + "'");
    try {
        return parse_scenario(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

// ---------------------------------------------------------------- snapshots

struct SnapshotTable {
    Field field = Field::complex;
    std::size_t dimension = 0;
    std::vector<double> times;
    std::vector<std::vector<Complex>> rows;
};

/// Header "t,re_0,im_0,...,re_{n-1},im_{n-1}" (complex) or "t,x_0,...,x_{n-1}"
/// (real). Rows must have every column and strictly increasing t.
inline SnapshotTable parse_snapshots(std::istream& in) {
    std::string raw;
    std::size_t line = 0;
    if (!std::getline(in, raw)) throw ParseError("snapshot file is empty");
    ++line;
    const auto header = split(trim(raw), ',');
    if (header.empty() || header[0] != "t") throw ParseError("first header column must be 't'", line);
    SnapshotTable tab;
    const std::size_t data_cols = header.size() - 1;
    if (data_cols == 0) throw ParseError("header has no data columns", line);
    if (header[1] == "x_0") {
        tab.field = Field::real;
        tab.dimension = data_cols;
        for (std::size_t i = 0; i < data_cols; ++i) {
            if (header[i + 1] != "x_" + std::to_string(i)) throw ParseError("expected column x_" + std::to_string(i), line);
        }
    } else if (header[1] == "re_0") {
        if (data_cols % 2 != 0) throw ParseError("complex header needs re/im column pairs", line);
        tab.field = Field::complex;
        tab.dimension = data_cols / 2;
        for (std::size_t i = 0; i < tab.dimension; ++i) {
            if (header[2 * i + 1] != "re_" + std::to_string(i) || header[2 * i + 2] != "im_" + std::to_string(i)) {
                throw ParseError("expected columns re_" + std::to_string(i) + ",im_" + std::to_string(i), line);
            }
        }
    } else {
        throw ParseError("second header column must be x_0 or re_0", line);
    }

    while (std::getline(in, raw)) {
        ++line;
        const auto s = trim(raw);
        if (s.empty()) continue;
        const auto cells = split(s, ',');
        if (cells.size() != header.size()) {
            throw ParseError("row " + std::to_string(tab.rows.size() + 1) + " has " + std::to_string(cells.size()) +
                                 " columns, expected " + std::to_string(header.size()),
                             line);
        }
        const double t = parse_double(cells[0], line, "t");
        if (!std::isfinite(t)) throw ParseError("t must be finite", line);
        if (!tab.times.empty() && !(t > tab.times.back())) throw ParseError("t must be strictly increasing", line);
        std::vector<Complex> x(tab.dimension);
        for (std::size_t i = 0; i < tab.dimension; ++i) {
            double re = 0.0, im = 0.0;
            if (tab.field == Field::real) {
                re = parse_double(cells[i + 1], line, "x_" + std::to_string(i));
            } else {
                re = parse_double(cells[2 * i + 1], line, "re_" + std::to_string(i));
                im = parse_double(cells[2 * i + 2], line, "im_" + std::to_string(i));
            }
            if (!std::isfinite(re) || !std::isfinite(im)) throw ParseError("snapshot entries must be finite", line);
            x[i] = Complex(re, im);
        }
        tab.times.push_back(t);
        tab.rows.push_back(std::move(x));
    }
    if (tab.rows.empty()) throw ParseError("snapshot file has no data rows");
    return tab;
}

inline SnapshotTable load_snapshots(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open snapshot file '" + path + "'");
    try {
        return parse_snapshots(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline void write_snapshots(std::ostream& out, const SnapshotTable& tab) {
    out << 't';
    for (std::size_t i = 0; i < tab.dimension; ++i) {
        if (tab.field == Field::real) out << ",x_" << i;
        else out << ",re_" << i << ",im_" << i;
    }
    out << '\n';
    for (std::size_t r = 0; r < tab.rows.size(); ++r) {
        out << format_number(tab.times[r]);
        for (const auto& v : tab.rows[r]) {
            out << ',' << format_number(v.real());
            if (tab.field == Field::complex) out << ',' << format_number(v.imag());
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------- outputs

inline void write_trace(std::ostream& out, const TrackingTrace& trace) {
    out << "t,r,rhat_mm,rhat_kn,sigma2_hat,err_r,err_rhat_mm,err_rhat_kn\n";
    for (const auto& r : trace.records) {
        out << format_number(r.time) << ',' << r.r << ',' << r.rhat_mm << ',' << r.rhat_kn << ','
            << format_number(r.sigma2_hat) << ',' << format_number(r.err_r) << ',' << format_number(r.err_rhat_mm)
            << ',' << format_number(r.err_rhat_kn) << '\n';
    }
}

inline void write_sweep(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "rate,mm_mean,mm_sd,kn_mean,kn_sd\n";
    for (const auto& r : rows) {
        out << format_number(r.rate) << ',' << format_number(r.mm_mean) << ',' << format_number(r.mm_sd) << ','
            << format_number(r.kn_mean) << ',' << format_number(r.kn_sd) << '\n';
    }
}

/// Generic numeric CSV table.
inline void write_table(std::ostream& out, const std::vector<std::string>& header,
                        const std::vector<std::vector<double>>& rows) {
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << format_number(row[j]);
        out << '\n';
    }
}

/// Reads a numeric CSV with a header line; returns the header and rows.
inline std::pair<std::vector<std::string>, std::vector<std::vector<double>>> read_table(std::istream& in) {
    std::string raw;
    std::size_t line = 0;
    if (!std::getline(in, raw)) throw ParseError("table is empty");
    ++line;
    std::vector<std::string> header;
    for (auto h : split(trim(raw), ',')) header.emplace_back(h);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, raw)) {
        ++line;
        const auto s = trim(raw);
        if (s.empty()) continue;
        const auto cells = split(s, ',');
        if (cells.size() != header.size()) throw ParseError("row has the wrong number of columns", line);
        std::vector<double> row;
        for (std::size_t j = 0; j < cells.size(); ++j) row.push_back(parse_double(cells[j], line, header[j]));
        rows.push_back(std::move(row));
    }
    return {header, rows};
}

// ---------------------------------------------------------------- svg

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> err;  // optional symmetric error bars
};

/// Line chart with axes, tick labels and a legend. Non-finite points break
/// the polyline.
inline std::string svg_line_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                                  const std::vector<Series>& series, int width = 720, int height = 420) {
    const double left = 70, right = 160, top = 40, bottom = 55;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            const double e = i < s.err.size() ? s.err[i] : 0.0;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i] - e);
            ymax = std::max(ymax, s.y[i] + e);
        }
    }
    if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    const double pw = width - left - right, ph = height - top - bottom;
    auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };
    auto num = [](double v) { return format_number(std::round(v * 100.0) / 100.0); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
    o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 5; ++k) {
        const double xv = xmin + (xmax - xmin) * k / 5.0, yv = ymin + (ymax - ymin) * k / 5.0;
        o << "<line x1=\"" << num(px(xv)) << "\" y1=\"" << top + ph << "\" x2=\"" << num(px(xv)) << "\" y2=\""
          << top + ph + 5 << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << num(px(xv)) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
          << format_number(std::round(xv * 1000.0) / 1000.0) << "</text>\n";
        o << "<line x1=\"" << left - 5 << "\" y1=\"" << num(py(yv)) << "\" x2=\"" << left << "\" y2=\""
          << num(py(yv)) << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << left - 8 << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">"
          << format_number(std::round(yv * 1000.0) / 1000.0) << "</text>\n";
    }
    o << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">" << xlabel
      << "</text>\n";
    o << "<text transform=\"translate(18," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << ylabel
      << "</text>\n";
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = colors[si % 6];
        std::string path;
        bool pen = false;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
                pen = false;
                continue;
            }
            path += (pen ? " L" : " M") + num(px(s.x[i])) + ' ' + num(py(s.y[i]));
            pen = true;
            if (i < s.err.size() && s.err[i] > 0.0) {
                o << "<line x1=\"" << num(px(s.x[i])) << "\" y1=\"" << num(py(s.y[i] - s.err[i])) << "\" x2=\""
                  << num(px(s.x[i])) << "\" y2=\"" << num(py(s.y[i] + s.err[i])) << "\" stroke=\"" << color
                  << "\"/>\n";
            }
        }
        if (!path.empty()) {
            o << "<path d=\"" << path.substr(1) << "\" fill=\"none\" stroke=\"" << color
              << "\" stroke-width=\"1.5\"/>\n";
        }
        const double ly = top + 10 + 18.0 * static_cast<double>(si);
        o << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 32 << "\" y2=\"" << ly
          << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << left + pw + 38 << "\" y=\"" << ly + 4 << "\">" << s.name << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace rankest::io
