#include "qid/artifacts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace qid::artifacts {

namespace fs = std::filesystem;

std::string format_g12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_atomic(const std::string& path, const std::string& content) {
    const fs::path target(path);
    const fs::path dir = target.parent_path().empty() ? "." : target.parent_path();
    const fs::path tmp = dir / (target.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write to " + tmp.string());
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw std::runtime_error("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("rename failed for " + path + ": " + ec.message());
    }
}

std::string trajectory_csv(const sim::Trajectory& traj) {
    std::ostringstream out;
    out << "t,y_true,y_meas,r11,r22,r33,r12,r13,r23,"
           "rh11,rh22,rh33,rh12,rh13,rh23,omega12_hat,omega23_hat,fidelity\n";
    for (const sim::Sample& s : traj) {
        const qmat::RealSym3& r = s.rho;
        const qmat::RealSym3& h = s.rho_hat;
        const double vals[18] = {s.t, s.y_true, s.y_meas,
                                 r.d1, r.d2, r.d3, r.o12, r.o13, r.o23,
                                 h.d1, h.d2, h.d3, h.o12, h.o13, h.o23,
                                 s.omega12_hat, s.omega23_hat, s.fidelity};
        for (int i = 0; i < 18; ++i) {
            if (i) out << ',';
            out << format_g12(vals[i]);
        }
        out << '\n';
    }
    return out.str();
}

std::string sweep_csv(const std::vector<sim::RunRecord>& runs) {
    std::ostringstream out;
    out << "seed,status,omega12_hat,omega23_hat,rel_err12,rel_err23,tconv12,tconv23\n";
    for (const sim::RunRecord& r : runs) {
        out << r.seed << ',' << (r.status == "ok" ? "ok" : "failed") << ',';
        if (r.status == "ok") {
            out << format_g12(r.result.omega12_hat_final) << ','
                << format_g12(r.result.omega23_hat_final) << ','
                << format_g12(r.result.rel_err12) << ','
                << format_g12(r.result.rel_err23) << ','
                << (r.result.tconv12 ? format_g12(*r.result.tconv12) : "none") << ','
                << (r.result.tconv23 ? format_g12(*r.result.tconv23) : "none");
        } else {
            out << ",,,,,";
        }
        out << '\n';
    }
    return out.str();
}

std::string svg_line_plot(const std::string& title,
                          const std::vector<PlotSeries>& series,
                          const std::string& x_label,
                          const std::string& y_label) {
    const double width = 860, height = 480;
    const double ml = 70, mr = 20, mt = 40, mb = 50;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            xmin = std::min(xmin, x); xmax = std::max(xmax, x);
            ymin = std::min(ymin, y); ymax = std::max(ymax, y);
        }
    if (!(xmax > xmin)) { xmin -= 1; xmax += 1; }
    if (!(ymax > ymin)) { ymin -= 1; ymax += 1; }
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad; ymax += ypad;

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return mt + (ymax - y) / (ymax - ymin) * ph; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" font-family=\"sans-serif\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
           "font-size=\"16\">" << title << "</text>\n";

    // axes and ticks
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw
        << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 5.0;
        const double yv = ymin + (ymax - ymin) * i / 5.0;
        out << "<line x1=\"" << px(xv) << "\" y1=\"" << mt + ph << "\" x2=\""
            << px(xv) << "\" y2=\"" << mt + ph + 5 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << px(xv) << "\" y=\"" << mt + ph + 20
            << "\" text-anchor=\"middle\" font-size=\"11\">" << format_g12(xv)
            << "</text>\n";
        out << "<line x1=\"" << ml - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << ml
            << "\" y2=\"" << py(yv) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << ml - 8 << "\" y=\"" << py(yv) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << format_g12(yv)
            << "</text>\n";
    }
    out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label << "</text>\n";
    if (!y_label.empty())
        out << "<text x=\"16\" y=\"" << mt + ph / 2
            << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
            << mt + ph / 2 << ")\">" << y_label << "</text>\n";

    // polylines (decimated to keep files small)
    for (const auto& s : series) {
        const std::size_t n = s.points.size();
        const std::size_t stride = std::max<std::size_t>(1, n / 2000);
        out << "<polyline fill=\"none\" stroke=\"" << s.color
            << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < n; i += stride) {
            out << px(s.points[i].first) << ',' << py(s.points[i].second) << ' ';
        }
        if ((n - 1) % stride != 0 && n > 0)
            out << px(s.points[n - 1].first) << ',' << py(s.points[n - 1].second);
        out << "\"/>\n";
    }

    // legend
    double ly = mt + 16;
    for (const auto& s : series) {
        out << "<line x1=\"" << ml + 12 << "\" y1=\"" << ly - 4 << "\" x2=\""
            << ml + 40 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << s.color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << ml + 46 << "\" y=\"" << ly
            << "\" font-size=\"12\">" << s.label << "</text>\n";
        ly += 18;
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace qid::artifacts
