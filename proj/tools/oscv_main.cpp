// oscv -- bandwidth selection for kernel density estimation by one-sided
// cross-validation, with rescaling constants, robust-kernel scans and a
// Monte Carlo simulation harness.
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "oscv/densities.hpp"
#include "oscv/kernels.hpp"
#include "oscv/rescaling.hpp"
#include "oscv/selection.hpp"
#include "oscv/simulation.hpp"

using json = nlohmann::ordered_json;
using namespace oscv;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kSchemaVersion = 1;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitNumerical = 4;

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

json quadrature_json(const QuadratureConfig& cfg) {
    return json{{"abs_tol", cfg.abs_tol},
                {"rel_tol", cfg.rel_tol},
                {"truncation_bound", cfg.truncation_bound},
                {"outer_grid_max", cfg.outer_grid_max}};
}

// Default quadrature config, optionally overridden by the JSON file named
// in OSCV_QUAD_CONFIG.
QuadratureConfig load_quadrature_config() {
    QuadratureConfig cfg;
    const char* path = std::getenv("OSCV_QUAD_CONFIG");
    if (!path || !*path) return cfg;
    std::ifstream in(path);
    if (!in) throw FileNotFound(std::string("quadrature config not found: ") + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(std::string("quadrature config: ") + e.what());
    }
    if (j.contains("abs_tol")) cfg.abs_tol = j["abs_tol"].get<double>();
    if (j.contains("rel_tol")) cfg.rel_tol = j["rel_tol"].get<double>();
    if (j.contains("truncation_bound"))
        cfg.truncation_bound = j["truncation_bound"].get<double>();
    if (j.contains("outer_grid_max")) cfg.outer_grid_max = j["outer_grid_max"].get<double>();
    cfg.validate();
    return cfg;
}

json make_manifest(const std::string& subcommand, const std::vector<std::string>& args,
                   const QuadratureConfig& cfg,
                   std::optional<std::uint64_t> seed = std::nullopt) {
    json m;
    m["tool"] = "oscv";
    m["version"] = kVersion;
    m["subcommand"] = subcommand;
    m["arguments"] = args;
    if (seed)
        m["seed"] = std::to_string(*seed);
    else
        m["seed"] = nullptr;
    m["quadrature"] = quadrature_json(cfg);
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(fnv1a(quadrature_json(cfg).dump())));
    m["quadrature_config_hash"] = std::string(hash);
    return m;
}

// temp file + rename so partially written outputs never land under the
// target name
void write_atomic(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open for writing: " + tmp.string());
        out << content;
        if (!out) throw Error("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

// One numeric column; optional header; comma or whitespace delimited.
std::vector<double> read_column_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFound("cannot open data file: " + path);
    std::vector<double> values;
    std::string line;
    int row = 0;
    bool header_allowed = true;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string token;
        int fields = 0;
        for (char c : line) {
            if (c == ',' || c == ';' || c == ' ' || c == '\t') {
                if (!token.empty()) break;
                continue;
            }
            token += c;
        }
        // count residual fields to reject multi-column input
        {
            std::string rest = line;
            for (char& c : rest)
                if (c == ',' || c == ';' || c == '\t') c = ' ';
            std::istringstream split(rest);
            std::string f;
            while (split >> f) ++fields;
        }
        if (token.empty()) continue;  // blank line
        if (fields > 1)
            throw ParseError("expected one column at " + path + ":" +
                             std::to_string(row));
        if (!token.empty() && token.front() == '"' && token.size() >= 2 &&
            token.back() == '"')
            token = token.substr(1, token.size() - 2);
        try {
            size_t pos = 0;
            const double v = std::stod(token, &pos);
            if (pos != token.size()) throw std::invalid_argument(token);
            values.push_back(v);
            header_allowed = false;
        } catch (const std::exception&) {
            if (header_allowed) {
                header_allowed = false;  // one header line is fine
                continue;
            }
            throw ParseError("not a number at " + path + ":" + std::to_string(row) +
                             " column 1: '" + token + "'");
        }
    }
    if (values.size() < 2)
        throw ParseError("need at least 2 observations in " + path);
    return values;
}

json constants_row_json(const ConstantsRecord& rec) {
    return json{{"estimation_kernel", rec.estimation_kernel},
                {"cv_kernel", rec.cv_kernel},
                {"C", rec.c_smooth},
                {"C_star", rec.c_nonsmooth},
                {"E_C_percent", rec.e_c_percent}};
}

json curve_json(const CriterionCurve& curve) {
    json j;
    j["minimizer"] = curve.minimizer;
    j["degenerate"] = curve.degenerate;
    j["local_minima"] = curve.local_minima;
    j["grid"] = curve.grid;
    j["values"] = curve.values;
    return j;
}

MixtureSpec mixture_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFound("density spec not found: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(std::string("density spec: ") + e.what());
    }
    MixtureSpec spec;
    try {
        const auto weights = j.at("weights").get<std::vector<double>>();
        const auto locations = j.at("locations").get<std::vector<double>>();
        const auto scales = j.at("scales").get<std::vector<double>>();
        if (weights.size() != locations.size() || weights.size() != scales.size())
            throw ParseError("density spec: weights/locations/scales lengths differ");
        spec.label = j.value("label", std::filesystem::path(path).stem().string());
        for (size_t i = 0; i < weights.size(); ++i)
            spec.components.push_back({weights[i], locations[i], scales[i]});
    } catch (const json::exception& e) {
        throw ParseError(std::string("density spec: ") + e.what());
    }
    return spec;
}

TestDensity density_from_arg(const std::string& arg) {
    if (arg == "normal" || arg == "cusped7" || arg == "laplace") return make_density(arg);
    return make_density(mixture_from_json_file(arg));
}

struct CommonSelectArgs {
    std::string data_path;
    std::string mode = "smooth";
    std::string cv_label = "one_sided:gaussian";
    std::string kernel_label = "gaussian";
    double grid_lo = 0.0, grid_hi = 0.0;
    int grid_n = 201;
    bool allow_degenerate = false;
    std::string out;
};

GridPolicy policy_from(const CommonSelectArgs& a) {
    GridPolicy policy;
    policy.n_points = a.grid_n;
    if (a.grid_lo > 0.0) policy.lo_override = a.grid_lo;
    if (a.grid_hi > 0.0) policy.hi_override = a.grid_hi;
    return policy;
}

int exit_code_for(const Error& e) {
    if (dynamic_cast<const DegenerateCriterion*>(&e)) return kExitDegenerate;
    if (dynamic_cast<const FileNotFound*>(&e) || dynamic_cast<const ParseError*>(&e) ||
        dynamic_cast<const UnknownKernelLabel*>(&e) ||
        dynamic_cast<const InvalidParam*>(&e) || dynamic_cast<const InvalidSpec*>(&e) ||
        dynamic_cast<const InvalidSample*>(&e) ||
        dynamic_cast<const InvalidBandwidth*>(&e) ||
        dynamic_cast<const NotRobustKernel*>(&e))
        return kExitInput;
    return kExitNumerical;  // quadrature, degenerate kernels, tails, ...
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"one-sided cross-validation bandwidth selection toolkit"};
    app.require_subcommand(1);

    std::vector<std::string> raw_args(argv + 1, argv + argc);

    // ---- constants ----
    auto* cmd_constants = app.add_subcommand(
        "constants", "rescaling constants C, C* and E_C for kernel pairs");
    std::string const_kernel = "gaussian";
    std::vector<std::string> const_cv_labels;
    std::vector<std::string> const_li;
    std::string const_format = "csv";
    std::string const_out;
    cmd_constants->add_option("--kernel", const_kernel, "estimation kernel label");
    cmd_constants->add_option("--oscv-kernel", const_cv_labels,
                              "cv kernel label (repeatable)");
    cmd_constants->add_option("--li", const_li,
                              "L_I parameters alpha:sigma (repeatable)");
    cmd_constants->add_option("--format", const_format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd_constants->add_option("--out", const_out, "output path (default stdout)");

    // ---- select ----
    auto* cmd_select = app.add_subcommand("select", "select a bandwidth from data");
    CommonSelectArgs sel_args;
    cmd_select->add_option("data", sel_args.data_path, "one-column CSV of observations")
        ->required();
    cmd_select->add_option("--mode", sel_args.mode, "smooth|nonsmooth|robust|lscv");
    cmd_select->add_option("--oscv-kernel", sel_args.cv_label, "cv kernel label");
    cmd_select->add_option("--kernel", sel_args.kernel_label, "estimation kernel label");
    cmd_select->add_option("--grid-lo", sel_args.grid_lo, "grid lower bound (data units)");
    cmd_select->add_option("--grid-hi", sel_args.grid_hi, "grid upper bound (data units)");
    cmd_select->add_option("--grid-n", sel_args.grid_n, "grid size");
    cmd_select->add_flag("--allow-degenerate", sel_args.allow_degenerate,
                         "accept a boundary minimizer");
    cmd_select->add_option("--out", sel_args.out, "output path (default stdout)");

    // ---- curve ----
    auto* cmd_curve = app.add_subcommand("curve", "export a criterion curve as CSV");
    CommonSelectArgs curve_args;
    std::string curve_criterion = "oscv";
    cmd_curve->add_option("data", curve_args.data_path, "one-column CSV of observations")
        ->required();
    cmd_curve->add_option("--criterion", curve_criterion, "oscv or lscv")
        ->check(CLI::IsMember({"oscv", "lscv"}));
    cmd_curve->add_option("--oscv-kernel", curve_args.cv_label, "cv kernel label");
    cmd_curve->add_option("--kernel", curve_args.kernel_label, "estimation kernel label");
    cmd_curve->add_option("--grid-lo", curve_args.grid_lo, "grid lower bound");
    cmd_curve->add_option("--grid-hi", curve_args.grid_hi, "grid upper bound");
    cmd_curve->add_option("--grid-n", curve_args.grid_n, "grid size");
    cmd_curve->add_option("--out", curve_args.out, "output path (default stdout)");

    // ---- scan ----
    auto* cmd_scan = app.add_subcommand("scan", "scan the L_I family for robust kernels");
    double scan_alpha_lo = 0.0, scan_alpha_hi = 1.0, scan_alpha_step = 0.1;
    double scan_sigma_lo = 1.0, scan_sigma_hi = 1.0, scan_sigma_step = 1.0;
    double scan_threshold = 5.0;
    std::string scan_out;
    cmd_scan->add_option("--alpha-lo", scan_alpha_lo, "alpha range start");
    cmd_scan->add_option("--alpha-hi", scan_alpha_hi, "alpha range end");
    cmd_scan->add_option("--alpha-step", scan_alpha_step, "alpha step");
    cmd_scan->add_option("--sigma-lo", scan_sigma_lo, "sigma range start");
    cmd_scan->add_option("--sigma-hi", scan_sigma_hi, "sigma range end");
    cmd_scan->add_option("--sigma-step", scan_sigma_step, "sigma step");
    cmd_scan->add_option("--threshold", scan_threshold, "|E_C| threshold in percent");
    cmd_scan->add_option("--out", scan_out, "output path (default stdout)");

    // ---- simulate ----
    auto* cmd_simulate = app.add_subcommand("simulate", "Monte Carlo bandwidth study");
    std::string sim_density = "cusped7";
    int sim_n = 500;
    int sim_reps = 100;
    std::string sim_methods = "lscv,oscv_smooth,oscv_nonsmooth";
    std::uint64_t sim_seed = 1;
    std::string sim_cv_label = "one_sided:gaussian";
    std::string sim_kernel_label = "gaussian";
    std::string sim_out;
    cmd_simulate->add_option("--density", sim_density,
                             "normal|laplace|cusped7|path to mixture JSON");
    cmd_simulate->add_option("--n", sim_n, "sample size")->check(CLI::PositiveNumber);
    cmd_simulate->add_option("--reps", sim_reps, "replications")->check(CLI::PositiveNumber);
    cmd_simulate->add_option("--methods", sim_methods,
                             "comma list: lscv, oscv_smooth, oscv_nonsmooth, "
                             "oscv_robust:<kernel label>");
    cmd_simulate->add_option("--seed", sim_seed, "master seed");
    cmd_simulate->add_option("--oscv-kernel", sim_cv_label, "cv kernel for oscv methods");
    cmd_simulate->add_option("--kernel", sim_kernel_label, "estimation kernel");
    cmd_simulate->add_option("--out", sim_out, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitInput;
    }

    try {
        const QuadratureConfig cfg = load_quadrature_config();

        if (cmd_constants->parsed()) {
            std::vector<ConstantsRecord> rows;
            if (const_cv_labels.empty() && const_li.empty()) {
                // the H = K table rows
                for (const char* base : {"epanechnikov", "quartic", "gaussian"}) {
                    const Kernel k = kernel_from_label(base);
                    rows.push_back(make_constants_record(k, make_one_sided(k), cfg));
                }
            }
            const Kernel k = kernel_from_label(const_kernel);
            for (const std::string& label : const_cv_labels)
                rows.push_back(make_constants_record(k, kernel_from_label(label), cfg));
            for (const std::string& spec : const_li)
                rows.push_back(make_constants_record(k, kernel_from_label("LI:" + spec), cfg));

            const json manifest = make_manifest("constants", raw_args, cfg);
            if (const_format == "json") {
                json out;
                out["schema_version"] = kSchemaVersion;
                out["manifest"] = manifest;
                out["rows"] = json::array();
                for (const auto& rec : rows) out["rows"].push_back(constants_row_json(rec));
                write_atomic(const_out, out.dump(2) + "\n");
            } else {
                std::ostringstream csv;
                csv << "# manifest: " << manifest.dump() << "\n";
                csv << "estimation_kernel,cv_kernel,C,C_star,E_C_percent\n";
                for (const auto& rec : rows)
                    csv << rec.estimation_kernel << ',' << rec.cv_kernel << ','
                        << format_double(rec.c_smooth) << ','
                        << format_double(rec.c_nonsmooth) << ','
                        << format_double(rec.e_c_percent) << "\n";
                write_atomic(const_out, csv.str());
            }
            return kExitOk;
        }

        if (cmd_select->parsed()) {
            const Sample sample(read_column_csv(sel_args.data_path));
            const SelectionMode mode = selection_mode_from_string(sel_args.mode);
            const Kernel cv = kernel_from_label(sel_args.cv_label);
            const Kernel est = kernel_from_label(sel_args.kernel_label);
            const BandwidthSelection sel =
                select(sample, mode, cv, est, policy_from(sel_args), cfg);

            json out;
            out["schema_version"] = kSchemaVersion;
            out["manifest"] = make_manifest("select", raw_args, cfg);
            out["mode"] = to_string(sel.mode);
            out["estimation_kernel"] = est.label();
            out["cv_kernel"] =
                mode == SelectionMode::lscv ? est.label() : cv.label();
            out["n"] = sample.n();
            out["raw_minimizer"] = sel.raw_minimizer;
            out["constant"] = sel.constant;
            out["bandwidth"] = sel.bandwidth;
            out["degenerate"] = sel.curve.degenerate;
            out["local_minima"] = sel.curve.local_minima;
            out["curve"] = curve_json(sel.curve);
            write_atomic(sel_args.out, out.dump(2) + "\n");

            if (sel.curve.degenerate && !sel_args.allow_degenerate) {
                std::cerr << "oscv select: degenerate criterion (minimum at the lower "
                             "grid edge); rerun with --allow-degenerate to use it\n";
                return kExitDegenerate;
            }
            return kExitOk;
        }

        if (cmd_curve->parsed()) {
            const Sample sample(read_column_csv(curve_args.data_path));
            const Kernel cv = kernel_from_label(curve_args.cv_label);
            const Kernel est = kernel_from_label(curve_args.kernel_label);
            const std::vector<double> grid = policy_from(curve_args).make_grid(sample);
            const CriterionCurve curve = curve_criterion == "oscv"
                                             ? oscv_curve(sample, cv, grid)
                                             : lscv_curve(sample, est, grid);

            std::ostringstream csv;
            csv << "# manifest: " << make_manifest("curve", raw_args, cfg).dump() << "\n";
            csv << "# criterion: " << curve_criterion << "\n";
            csv << "# kernel: " << (curve_criterion == "oscv" ? cv.label() : est.label())
                << "\n";
            csv << "# minimizer: " << format_double(curve.minimizer) << "\n";
            csv << "# degenerate: " << (curve.degenerate ? "true" : "false") << "\n";
            csv << "# local_minima:";
            for (double b : curve.local_minima) csv << ' ' << format_double(b);
            csv << "\n";
            csv << "bandwidth,value\n";
            for (size_t i = 0; i < curve.grid.size(); ++i)
                csv << format_double(curve.grid[i]) << ',' << format_double(curve.values[i])
                    << "\n";
            write_atomic(curve_args.out, csv.str());
            return kExitOk;
        }

        if (cmd_scan->parsed()) {
            const ScanResult res =
                scan_robust(scan_alpha_lo, scan_alpha_hi, scan_alpha_step, scan_sigma_lo,
                            scan_sigma_hi, scan_sigma_step, scan_threshold, cfg);
            json out;
            out["schema_version"] = kSchemaVersion;
            out["manifest"] = make_manifest("scan", raw_args, cfg);
            out["hits"] = json::array();
            for (const ScanHit& hit : res.hits)
                out["hits"].push_back(json{{"alpha", hit.params.alpha},
                                           {"sigma", hit.params.sigma},
                                           {"a", hit.params.a},
                                           {"b_coef", hit.params.b_coef},
                                           {"c", hit.params.c},
                                           {"E_C_percent", hit.e_c_percent},
                                           {"refined", hit.refined}});
            out["skipped"] = json::array();
            for (const ScanSkip& skip : res.skipped)
                out["skipped"].push_back(json{
                    {"alpha", skip.alpha}, {"sigma", skip.sigma}, {"reason", skip.reason}});
            write_atomic(scan_out, out.dump(2) + "\n");
            return kExitOk;
        }

        if (cmd_simulate->parsed()) {
            const TestDensity density = density_from_arg(sim_density);
            const Kernel cv = kernel_from_label(sim_cv_label);
            const Kernel est = kernel_from_label(sim_kernel_label);

            std::vector<MethodSpec> methods;
            std::istringstream list(sim_methods);
            std::string token;
            while (std::getline(list, token, ',')) {
                if (token.empty()) continue;
                if (token == "lscv")
                    methods.push_back(MethodSpec::lscv(est));
                else if (token == "oscv_smooth")
                    methods.push_back(MethodSpec::oscv(MethodKind::oscv_smooth, cv, est));
                else if (token == "oscv_nonsmooth")
                    methods.push_back(MethodSpec::oscv(MethodKind::oscv_nonsmooth, cv, est));
                else if (token.rfind("oscv_robust:", 0) == 0)
                    methods.push_back(MethodSpec::oscv(
                        MethodKind::oscv_robust,
                        kernel_from_label(token.substr(std::string("oscv_robust:").size())),
                        est));
                else
                    throw InvalidParam("unknown method: " + token);
            }
            if (methods.empty()) throw InvalidParam("simulate: no methods given");

            const SimulationReport report =
                monte_carlo_study(density, sim_n, sim_reps, methods, sim_seed, {}, cfg);

            json out;
            out["schema_version"] = kSchemaVersion;
            out["manifest"] = make_manifest("simulate", raw_args, cfg, sim_seed);
            out["density"] = report.density_label;
            out["n"] = report.n;
            out["replications"] = report.replications;
            out["master_seed"] = std::to_string(report.master_seed);
            out["h0_excluded"] = report.h0_excluded;
            out["summaries"] = json::array();
            for (const MethodSummary& s : report.summaries)
                out["summaries"].push_back(json{{"method", s.name},
                                                {"delta_b", s.delta_b},
                                                {"delta_ise", s.delta_ise},
                                                {"excluded", s.excluded}});
            out["records"] = json::array();
            for (size_t r = 0; r < report.records.size(); ++r) {
                const ReplicationRecord& rec = report.records[r];
                json jr;
                jr["index"] = r;
                jr["seed"] = std::to_string(rec.seed);
                jr["h0"] = rec.h0;
                jr["ise_h0"] = rec.ise_h0;
                jr["h0_degenerate"] = rec.h0_degenerate;
                jr["methods"] = json::array();
                for (size_t m = 0; m < report.summaries.size(); ++m)
                    jr["methods"].push_back(json{{"method", report.summaries[m].name},
                                                 {"bandwidth", rec.results[m].bandwidth},
                                                 {"ise", rec.results[m].ise_value},
                                                 {"degenerate", rec.results[m].degenerate}});
                out["records"].push_back(jr);
            }
            write_atomic(sim_out, out.dump(2) + "\n");
            return kExitOk;
        }
    } catch (const Error& e) {
        std::cerr << "oscv: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "oscv: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
