// Command-line surface for the Pearson VII location-estimation library:
// sampling, estimation, theory constants, and the Monte Carlo runners, with
// CSV or newline-delimited JSON output.
//
// Exit codes: 0 success, 1 usage error, 2 numerical or I/O failure.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pvii/pvii.hpp"

namespace {

using pvii::OutputRecord;
using json = pvii::json;

struct CommonOpts {
    std::string format = "csv";
    std::string out_path;
    bool timing = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--format", opts.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    cmd->add_option("--out", opts.out_path, "Write records to this file instead of stdout");
    cmd->add_flag("--timing", opts.timing,
                  "Record wall time in the output (off by default so reruns are byte-identical)");
}

std::vector<double> parse_inline_data(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(token, &pos);
        } catch (const std::exception&) {
            throw CLI::ValidationError("--data", "could not parse '" + token + "' as a number");
        }
        while (pos < token.size() && std::isspace(static_cast<unsigned char>(token[pos]))) ++pos;
        if (pos != token.size())
            throw CLI::ValidationError("--data", "could not parse '" + token + "' as a number");
        values.push_back(v);
    }
    if (values.empty()) throw CLI::ValidationError("--data", "no values given");
    return values;
}

std::vector<double> read_data_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--in", "cannot open '" + path + "'");
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            values.push_back(std::stod(line));
        } catch (const std::exception&) {
            throw CLI::ValidationError("--in", "could not parse '" + line + "' as a number");
        }
    }
    if (values.empty()) throw CLI::ValidationError("--in", "no values in '" + path + "'");
    return values;
}

int emit_records(const std::vector<OutputRecord>& records, const CommonOpts& opts) {
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!opts.out_path.empty()) {
        file.open(opts.out_path);
        if (!file) {
            std::cerr << "error: cannot open output file '" << opts.out_path << "'\n";
            return 2;
        }
        out = &file;
    }
    if (opts.format == "json")
        pvii::emit_json(records, *out);
    else
        pvii::emit_csv(records, *out);
    out->flush();
    if (!out->good()) {
        std::cerr << "error: write failed\n";
        return 2;
    }
    return 0;
}

class Stopwatch {
  public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void stamp(std::vector<OutputRecord>& records, const Stopwatch& watch, bool wanted) {
    const double elapsed = watch.seconds();
    std::cerr << "# wall " << elapsed << " s\n";
    if (!wanted) return;
    for (auto& rec : records) rec.timing_s = elapsed;
}

json number_array(const std::vector<double>& values) {
    json arr = json::array();
    for (double v : values) arr.push_back(v);
    return arr;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pearson Type VII location MLE toolkit"};
    app.require_subcommand(1);

    // --- sample -----------------------------------------------------------
    auto* cmd_sample = app.add_subcommand("sample", "Draw i.i.d. PVII_m(mu, sigma) variates");
    double s_m = 1.0, s_mu = 0.0, s_sigma = 1.0;
    std::size_t s_n = 0;
    std::uint64_t s_seed = 0;
    CommonOpts s_opts;
    cmd_sample->add_option("--m", s_m, "Shape parameter")->required();
    cmd_sample->add_option("--mu", s_mu, "Location")->capture_default_str();
    cmd_sample->add_option("--sigma", s_sigma, "Scale")->capture_default_str();
    cmd_sample->add_option("--n", s_n, "Number of draws")->required();
    cmd_sample->add_option("--seed", s_seed, "Master seed")->required();
    add_common(cmd_sample, s_opts);

    // --- mle / roots --------------------------------------------------------
    auto* cmd_mle = app.add_subcommand("mle", "Global maximum likelihood location estimate");
    std::string mle_data, mle_in, mle_method = "global";
    CommonOpts mle_opts;
    cmd_mle->add_option("--data", mle_data, "Comma-separated observations");
    cmd_mle->add_option("--in", mle_in, "File with one observation per line");
    cmd_mle->add_option("--method", mle_method, "Estimation method")
        ->check(CLI::IsMember({"global", "local"}))
        ->capture_default_str();
    add_common(cmd_mle, mle_opts);

    auto* cmd_roots = app.add_subcommand("roots", "All roots of the likelihood equation");
    std::string roots_data, roots_in;
    CommonOpts roots_opts;
    cmd_roots->add_option("--data", roots_data, "Comma-separated observations");
    cmd_roots->add_option("--in", roots_in, "File with one observation per line");
    add_common(cmd_roots, roots_opts);

    // --- theory -------------------------------------------------------------
    auto* cmd_theory = app.add_subcommand("theory", "Closed-form asymptotic constants");
    double t_m = 1.0;
    CommonOpts t_opts;
    cmd_theory->add_option("--m", t_m, "Shape parameter")->required();
    add_common(cmd_theory, t_opts);

    // --- simulate -------------------------------------------------------------
    auto* cmd_sim = app.add_subcommand("simulate", "Seeded Monte Carlo experiment runners");
    cmd_sim->require_subcommand(1);
    double sim_m = 1.0, sim_eps = 1.0, sim_lambda_exp = 0.25;
    std::vector<std::size_t> sim_n;
    std::size_t sim_reps = 10000;
    std::uint64_t sim_seed = 0;
    unsigned sim_workers = 0;
    CommonOpts sim_opts;

    auto add_sim_common = [&](CLI::App* sub, bool multi_n) {
        sub->add_option("--m", sim_m, "Shape parameter")->required();
        auto* n_opt = sub->add_option("--n", sim_n, "Sample size (repeatable)")->required();
        if (!multi_n) n_opt->expected(1);
        sub->add_option("--seed", sim_seed, "Master seed")->required();
        sub->add_option("--workers", sim_workers,
                        "Worker threads (0 = all cores; never affects results)");
        add_common(sub, sim_opts);
        return sub;
    };

    auto* sim_var = add_sim_common(
        cmd_sim->add_subcommand("variance", "Monte Carlo mean of n * theta_hat^2"), true);
    sim_var->add_option("--reps", sim_reps, "Replicates per n")->required();

    auto* sim_clt = add_sim_common(
        cmd_sim->add_subcommand("clt", "Distribution of sqrt(n) * theta_hat"), false);
    sim_clt->add_option("--reps", sim_reps, "Replicates")->required();

    auto* sim_census = add_sim_common(
        cmd_sim->add_subcommand("roots", "Likelihood-equation root census"), false);
    sim_census->add_option("--reps", sim_reps, "Replicates")->required();

    auto* sim_dev = add_sim_common(
        cmd_sim->add_subcommand("deviation", "Moderate-deviation tail rates"), true);
    sim_dev->add_option("--reps", sim_reps, "Replicates per n")->required();
    sim_dev->add_option("--eps", sim_eps, "Deviation threshold scale")->capture_default_str();
    sim_dev->add_option("--lambda-exp", sim_lambda_exp, "Exponent a in lambda_n = n^a")
        ->capture_default_str();

    add_sim_common(cmd_sim->add_subcommand("lil", "Iterated-logarithm trace"), false);
    auto* sim_lil = cmd_sim->get_subcommand("lil");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n\n" << app.help() << '\n';
        return 1;
    }

    try {
        std::vector<OutputRecord> records;
        Stopwatch watch;
        CommonOpts opts;

        if (*cmd_sample) {
            opts = s_opts;
            pvii::Rng rng = pvii::Rng::stream(s_seed, 0);
            const pvii::Sample s = pvii::sample(s_n, pvii::Params(s_m, s_mu, s_sigma), rng);
            for (std::size_t i = 0; i < s.size(); ++i) {
                OutputRecord rec;
                rec.command = "sample";
                rec.params = {{"seed", s_seed}, {"m", s_m}, {"mu", s_mu},
                              {"sigma", s_sigma}, {"n", s_n}};
                rec.results = {{"index", i}, {"value", s.values()[i]}};
                records.push_back(std::move(rec));
            }
        } else if (*cmd_mle || *cmd_roots) {
            const bool is_mle = static_cast<bool>(*cmd_mle);
            opts = is_mle ? mle_opts : roots_opts;
            const std::string& inline_data = is_mle ? mle_data : roots_data;
            const std::string& file_path = is_mle ? mle_in : roots_in;
            if (inline_data.empty() == file_path.empty())
                throw CLI::ValidationError("--data/--in", "exactly one input source required");
            const pvii::Sample s(inline_data.empty() ? read_data_file(file_path)
                                                     : parse_inline_data(inline_data));
            const std::string source = inline_data.empty() ? file_path : "inline";

            if (is_mle) {
                const auto method = mle_method == "global"
                                        ? pvii::MleMethod::global
                                        : pvii::MleMethod::local_from_median;
                const auto res = pvii::mle(s, method);
                OutputRecord rec;
                rec.command = "mle";
                rec.params = {{"method", mle_method}, {"source", source}, {"n", s.size()}};
                rec.results = {{"estimate", res.estimate},
                               {"tie", res.tie},
                               {"root_count", res.roots.roots.size()},
                               {"roots", number_array(res.roots.roots)},
                               {"losses", number_array(res.losses)}};
                records.push_back(std::move(rec));
            } else {
                const auto rs = pvii::find_roots(s);
                OutputRecord rec;
                rec.command = "roots";
                rec.params = {{"source", source}, {"n", s.size()}};
                rec.results = {{"root_count", rs.roots.size()},
                               {"parity_ok", rs.parity_ok},
                               {"scan_step", rs.scan_step},
                               {"roots", number_array(rs.roots)}};
                records.push_back(std::move(rec));
            }
        } else if (*cmd_theory) {
            opts = t_opts;
            const auto c = pvii::constants(t_m);
            OutputRecord rec;
            rec.command = "theory";
            rec.params = {{"m", t_m}};
            rec.results = {{"c_m", c.c_m},
                           {"fisher", c.fisher},
                           {"asym_var", c.asym_var},
                           {"bahadur_slope", c.bahadur_slope},
                           {"lil_const", c.lil_const}};
            records.push_back(std::move(rec));
        } else {
            opts = sim_opts;
            pvii::ExperimentConfig cfg;
            cfg.m = sim_m;
            cfg.n_values = sim_n;
            cfg.reps = sim_reps;
            cfg.seed = sim_seed;
            cfg.workers = sim_workers;
            cfg.eps = sim_eps;
            cfg.lambda_exponent = sim_lambda_exp;

            // The resolved worker count is deliberately not echoed: outputs
            // must be byte-identical across --workers settings.
            if (*sim_var) {
                for (const auto& row : pvii::run_variance_table(cfg)) {
                    OutputRecord rec;
                    rec.command = "simulate-variance";
                    rec.params = {{"seed", sim_seed}, {"m", sim_m},
                                  {"reps_requested", sim_reps}, {"method", "global"}};
                    rec.results = {{"n", row.n},          {"estimate", row.estimate},
                                   {"mc_se", row.mc_se},  {"reps", row.reps_used},
                                   {"unstable", row.unstable}, {"errors", row.errors}};
                    records.push_back(std::move(rec));
                }
            } else if (*sim_clt) {
                const auto summary = pvii::run_clt(cfg);
                OutputRecord rec;
                rec.command = "simulate-clt";
                rec.params = {{"seed", sim_seed}, {"m", sim_m},
                              {"reps_requested", sim_reps}, {"method", "global"}};
                rec.results = {{"n", summary.n},
                               {"reps", summary.reps_used},
                               {"mean_scaled", summary.mean_scaled},
                               {"empirical_var_of_scaled", summary.empirical_var_of_scaled},
                               {"ks_distance", summary.ks_distance},
                               {"errors", summary.errors}};
                records.push_back(std::move(rec));
            } else if (*sim_census) {
                const auto census = pvii::run_root_census(cfg);
                const double c_m = pvii::normalizing_constant(sim_m);
                for (const auto& [count, freq] : census.counts) {
                    OutputRecord rec;
                    rec.command = "simulate-roots";
                    rec.params = {{"seed", sim_seed}, {"m", sim_m},
                                  {"n", sim_n.front()}, {"reps_requested", sim_reps}};
                    rec.results = {{"root_count", count},
                                   {"frequency", freq},
                                   {"fraction", static_cast<double>(freq) /
                                                    static_cast<double>(census.reps)},
                                   {"fitted_intensity", census.fitted_intensity},
                                   {"c_m_conjecture", c_m},
                                   {"reps", census.reps},
                                   {"errors", census.errors}};
                    records.push_back(std::move(rec));
                }
            } else if (*sim_dev) {
                for (const auto& pt : pvii::run_deviation(cfg)) {
                    OutputRecord rec;
                    rec.command = "simulate-deviation";
                    rec.params = {{"seed", sim_seed},
                                  {"m", sim_m},
                                  {"eps", sim_eps},
                                  {"lambda_exp", sim_lambda_exp},
                                  {"reps_requested", sim_reps}};
                    rec.results = {{"n", pt.n},
                                   {"lambda", pt.lambda},
                                   {"threshold", pt.threshold},
                                   {"hits", pt.hits},
                                   {"reps", pt.reps_used},
                                   {"empirical_rate", pt.empirical_rate},
                                   {"theory_rate", pt.theory_rate},
                                   {"errors", pt.errors}};
                    records.push_back(std::move(rec));
                }
            } else if (*sim_lil) {
                const auto trace = pvii::run_lil_trace(cfg);
                double sup_so_far = -INFINITY;
                for (const auto& pt : trace.points) {
                    sup_so_far = std::max(sup_so_far, pt.statistic);
                    OutputRecord rec;
                    rec.command = "simulate-lil";
                    rec.params = {{"seed", sim_seed}, {"m", sim_m}, {"n_final", sim_n.front()}};
                    rec.results = {{"n", pt.n},
                                   {"statistic", pt.statistic},
                                   {"sup_so_far", sup_so_far}};
                    records.push_back(std::move(rec));
                }
            }
        }

        stamp(records, watch, opts.timing);
        return emit_records(records, opts);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n\n" << app.help() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
