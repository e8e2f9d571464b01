#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace latfib {

/// Minimal static line chart: named series over a shared x axis, written as a
/// standalone SVG file. Enough for band-edge and count-vs-radius figures.
class LineChart {
  public:
    LineChart(std::string title, std::string xlabel, std::string ylabel)
        : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

    void add_series(std::string name, std::vector<double> x, std::vector<double> y) {
        if (x.size() != y.size()) throw std::invalid_argument("LineChart: x/y size mismatch");
        series_.push_back({std::move(name), std::move(x), std::move(y)});
    }

    void write(const std::string& path) const {
        const double w = 640, h = 420, ml = 70, mr = 20, mt = 40, mb = 50;
        double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
        bool first = true;
        for (const auto& s : series_) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (first) {
                    xmin = xmax = s.x[i];
                    ymin = ymax = s.y[i];
                    first = false;
                }
                xmin = std::min(xmin, s.x[i]);
                xmax = std::max(xmax, s.x[i]);
                ymin = std::min(ymin, s.y[i]);
                ymax = std::max(ymax, s.y[i]);
            }
        }
        if (xmax == xmin) xmax = xmin + 1;
        if (ymax == ymin) ymax = ymin + 1;
        const auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
        const auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };

        static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
        std::ostringstream out;
        out.precision(8);
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
            << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
        out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        out << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
            << title_ << "</text>\n";
        out << "<text x=\"" << w / 2 << "\" y=\"" << h - 10 << "\" text-anchor=\"middle\" font-size=\"12\">"
            << xlabel_ << "</text>\n";
        out << "<text x=\"16\" y=\"" << h / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
            << h / 2 << ")\">" << ylabel_ << "</text>\n";
        out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << w - ml - mr << "\" height=\""
            << h - mt - mb << "\" fill=\"none\" stroke=\"#333\"/>\n";
        for (int t = 0; t <= 4; ++t) {
            const double xv = xmin + (xmax - xmin) * t / 4.0;
            const double yv = ymin + (ymax - ymin) * t / 4.0;
            out << "<text x=\"" << px(xv) << "\" y=\"" << h - mb + 16
                << "\" text-anchor=\"middle\" font-size=\"10\">" << format_tick(xv) << "</text>\n";
            out << "<text x=\"" << ml - 6 << "\" y=\"" << py(yv) + 3
                << "\" text-anchor=\"end\" font-size=\"10\">" << format_tick(yv) << "</text>\n";
        }
        int ci = 0;
        for (const auto& s : series_) {
            const char* color = colors[ci % 6];
            out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                out << px(s.x[i]) << "," << py(s.y[i]) << " ";
            }
            out << "\"/>\n";
            out << "<text x=\"" << w - mr - 6 << "\" y=\"" << mt + 16 + 14 * ci
                << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << color << "\">" << s.name
                << "</text>\n";
            ++ci;
        }
        out << "</svg>\n";
        std::ofstream f(path);
        if (!f) throw std::runtime_error("LineChart: cannot open " + path);
        f << out.str();
    }

  private:
    static std::string format_tick(double v) {
        std::ostringstream o;
        o.precision(4);
        o << v;
        return o.str();
    }

    struct Series {
        std::string name;
        std::vector<double> x, y;
    };
    std::string title_, xlabel_, ylabel_;
    std::vector<Series> series_;
};

}  // namespace latfib
