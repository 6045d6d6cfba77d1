#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mlsg/driver.hpp"

namespace mlsg {

std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    if (v == 0.0)
        return "0"; // also folds -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string json_number(double v)
{
    return std::isfinite(v) ? format_double(v) : "null";
}

std::string json_string(const std::string& s)
{
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '"':
            out += "\\\"";
            break;
        case '\\':
            out += "\\\\";
            break;
        case '\n':
            out += "\\n";
            break;
        case '\t':
            out += "\\t";
            break;
        default:
            if (static_cast<unsigned char>(c) < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof buf, "\\u%04x", static_cast<unsigned>(static_cast<unsigned char>(c)));
                out += buf;
            } else {
                out += c;
            }
        }
    }
    return out + "\"";
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.close();
    if (!out)
        throw IoError("failed writing " + path.string());
}

} // namespace

std::string levels_csv(const RunReport& report)
{
    const bool wall = report.config.record_wall_clock;
    std::string out = "level,h,M,nu,cost_wall_s,cost_model,err_space,err_sample\n";
    for (const LevelRow& r : report.rows) {
        out += std::to_string(r.level) + ',' + format_double(r.h) + ',' + std::to_string(r.samples) + ',' +
               std::to_string(r.nu) + ',' + format_double(wall ? r.cost_wall_s : 0.0) + ',' +
               format_double(r.cost_model) + ',' + format_double(r.err_space) + ',' + format_double(r.err_sample) +
               '\n';
    }
    return out;
}

std::string summary_json(const RunReport& report)
{
    const bool wall = report.config.record_wall_clock;
    std::ostringstream o;
    o << "{\n  \"config\": {\n";
    const auto echo = config_echo(report.config);
    for (std::size_t k = 0; k < echo.size(); ++k) {
        const ConfigEntry& e = echo[k];
        o << "    " << json_string(e.key) << ": " << (e.is_text ? json_string(e.value) : e.value)
          << (k + 1 < echo.size() ? ",\n" : "\n");
    }
    o << "  },\n";
    o << "  \"status\": " << json_string(report.status) << ",\n";
    o << "  \"converged\": " << (report.converged ? "true" : "false") << ",\n";
    o << "  \"finest_level\": " << report.finest_level << ",\n";
    o << "  \"err_space\": " << json_number(report.err_space) << ",\n";
    o << "  \"err_sample\": " << json_number(report.err_sample) << ",\n";
    o << "  \"err_total\": " << json_number(report.err_space + report.err_sample) << ",\n";
    o << "  \"eps_cost_model\": " << json_number(report.eps_cost_model) << ",\n";
    o << "  \"eps_cost_wall_s\": " << json_number(wall ? report.eps_cost_wall_s : 0.0) << ",\n";
    o << "  \"total_work_model\": " << json_number(report.total_work_model) << ",\n";
    o << "  \"total_solves\": " << report.total_solves << ",\n";
    o << "  \"estimate_l2_norm\": " << json_number(report.estimate.empty() ? 0.0 : norm(report.estimate)) << ",\n";
    const RateParameters& r = report.rates;
    o << "  \"rates\": {\n";
    o << "    \"alpha\": " << json_number(r.alpha) << ",\n";
    o << "    \"beta\": " << json_number(r.beta) << ",\n";
    o << "    \"gamma\": " << json_number(r.gamma) << ",\n";
    o << "    \"mu1\": " << json_number(r.mu1) << ",\n";
    o << "    \"mu2\": " << json_number(r.mu2) << ",\n";
    o << "    \"c4\": " << json_number(r.c4) << ",\n";
    o << "    \"degenerate\": " << (r.degenerate ? "true" : "false") << ",\n";
    o << "    \"phi\": [";
    for (std::size_t k = 0; k < r.phi.size(); ++k)
        o << (k ? ", " : "") << json_number(r.phi[k]);
    o << "]\n  }\n}\n";
    return o.str();
}

std::string estimate_csv(const RunReport& report)
{
    if (report.estimate.empty())
        return "x,value\n";
    const GridFunction& g = report.estimate;
    const Mesh& mesh = g.space().mesh();
    std::string out = mesh.dim() == 1 ? "x,value\n" : "x1,x2,value\n";
    for (const SpatialPoint& p : mesh.vertices()) {
        if (mesh.dim() == 1)
            out += format_double(p.x1) + ',' + format_double(g.value_at(p)) + '\n';
        else
            out += format_double(p.x1) + ',' + format_double(p.x2) + ',' + format_double(g.value_at(p)) + '\n';
    }
    return out;
}

void emit_report(const RunReport& report, const std::filesystem::path& out_dir)
{
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());
    write_file(out_dir / "levels.csv", levels_csv(report));
    write_file(out_dir / "summary.json", summary_json(report));
    write_file(out_dir / "estimate.csv", estimate_csv(report));
}

} // namespace mlsg
