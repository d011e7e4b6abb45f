// rankest: Tracy-Widom tables, minimax thresholds, rank estimation from
// snapshot files, tracking simulations and sampling-rate sweeps.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rankest/doa_sim.hpp"
#include "rankest/io.hpp"
#include "rankest/minimax_threshold.hpp"
#include "rankest/rank_select.hpp"
#include "rankest/tracy_widom.hpp"

namespace fs = std::filesystem;
using namespace rankest;
using io::format_number;

namespace {

struct Options {
    // tw
    double from = -5.0, to = 3.0, step = 0.01;
    // model
    int beta = 2;
    std::size_t n = 9, N = 45;
    std::size_t rank_window = 0;  // 0 = every snapshot in the file
    double sigma2 = 1.0;
    std::optional<double> sigma2_opt;
    std::optional<double> lambda0;  // in units of sigma^2
    double ci = 1.0, ce = 1.0;
    std::optional<std::size_t> rmax;
    std::optional<double> false_alarm;
    bool lemma1 = false, lemma2 = false;
    // files
    std::string input, scenario, out, svg;
    std::optional<std::uint64_t> seed;
    std::vector<double> rates{1.0, 2.0, 4.0, 8.0};
    std::size_t replicates = 20;
};

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path.string() + "' for writing");
    f << content;
    f.close();
    if (!f) throw Error("failed writing '" + path.string() + "'");
}

void emit(const std::string& out, const std::string& content) {
    if (out.empty() || out == "-") {
        std::cout << content;
    } else {
        write_file(out, content);
    }
}

CostSchedule schedule(const Options& o, std::size_t n) {
    if (!(o.ci > 0.0)) throw DomainError("--ci must be positive");
    if (!(o.ce >= 0.0)) throw DomainError("--ce must be nonnegative");
    CostSchedule s{o.ci, std::vector<double>(n, o.ce)};
    if (o.rmax) {
        if (*o.rmax == 0 || *o.rmax > n) throw DomainError("--rmax must lie in [1, n]");
        for (std::size_t i = *o.rmax; i < n; ++i) s.c_exclusion[i] = 0.0;
    }
    s.validate();
    return s;
}

double relative_lambda0(const Options& o, const NoiseModel& unit) {
    const double l0 = o.lambda0 ? *o.lambda0 : default_lambda0(unit);
    if (!(l0 > std::sqrt(unit.gamma()))) {
        throw DomainError("--lambda0 = " + format_number(l0) + " must exceed sqrt(n/N) = " +
                          format_number(std::sqrt(unit.gamma())));
    }
    return l0;
}

int cmd_tw(const Options& o) {
    if (!(o.step > 0.0) || !(o.to >= o.from)) throw DomainError("need --step > 0 and --to >= --from");
    const auto& t1 = tracy_widom_table(1);
    const auto& t2 = tracy_widom_table(2);
    const auto count = static_cast<std::size_t>(std::llround((o.to - o.from) / o.step)) + 1;
    std::vector<std::vector<double>> rows;
    io::Series f1{"f1", {}, {}, {}}, f2{"f2", {}, {}, {}};
    for (std::size_t k = 0; k < count; ++k) {
        const double s = o.from + static_cast<double>(k) * o.step;
        rows.push_back({s, tw_cdf(t1, s), tw_pdf(t1, s), tw_cdf(t2, s), tw_pdf(t2, s)});
        f1.x.push_back(s);
        f1.y.push_back(rows.back()[2]);
        f2.x.push_back(s);
        f2.y.push_back(rows.back()[4]);
    }
    std::ostringstream csv;
    io::write_table(csv, {"s", "F1", "f1", "F2", "f2"}, rows);
    emit(o.out, csv.str());
    if (!o.svg.empty()) write_file(o.svg, io::svg_line_chart("Tracy-Widom densities", "s", "density", {f1, f2}));
    return 0;
}

int cmd_threshold(const Options& o) {
    const NoiseModel noise(o.n, o.N, o.sigma2, field_from_beta(o.beta));
    if (!(o.ci > 0.0)) throw DomainError("--ci must be positive");
    if (!(o.ce > 0.0)) throw DomainError("--ce must be positive");
    const double rel = relative_lambda0(o, noise.with_sigma2(1.0));
    const ThresholdProblem p{noise, rel * o.sigma2, o.ci, o.ce};
    const auto sol = solve_minimax_threshold(p);
    std::ostringstream out;
    out << "lambda0 = " << format_number(p.lambda0) << '\n';
    out << "T = " << format_number(sol.threshold) << '\n';
    out << "t = " << format_number(sol.standardized) << '\n';
    out << "risk = " << format_number(sol.max_risk) << '\n';
    out << "residual = " << format_number(sol.residual) << '\n';
    const double h = rel - std::sqrt(noise.gamma());
    if (o.lemma1) {
        const auto l1 = lemma1_threshold(h, noise, o.ci, o.ce);
        out << "lemma1_case = " << static_cast<int>(l1.which) << '\n';
        out << "lemma1_t = " << format_number(l1.standardized) << '\n';
        out << "lemma1_T = " << format_number(threshold_from_standardized(noise, l1.standardized)) << '\n';
    }
    if (o.lemma2) {
        const double h0 = h * std::cbrt(static_cast<double>(o.N));
        const auto l2 = lemma2_threshold(h0, noise, o.ci, o.ce);
        out << "lemma2_h0 = " << format_number(h0) << '\n';
        out << "lemma2_t = " << format_number(l2.standardized) << '\n';
        out << "lemma2_T = " << format_number(threshold_from_standardized(noise, l2.standardized)) << '\n';
        out << "lemma2_large_ce_t = " << format_number(l2.large_exclusion) << '\n';
        out << "lemma2_small_ce_t = " << format_number(l2.small_exclusion) << '\n';
    }
    std::cout << out.str();
    return 0;
}

int cmd_rank(const Options& o) {
    const auto tab = io::load_snapshots(o.input);
    const std::size_t n = tab.dimension;
    const std::size_t total = tab.rows.size();
    const std::size_t window_len = o.rank_window ? std::min(o.rank_window, total) : total;
    SnapshotWindow window(window_len, n, tab.field);
    for (std::size_t k = total - window_len; k < total; ++k) window.push({static_cast<long>(k), tab.rows[k]});
    const auto eig = hermitian_eig(sample_covariance(window));
    const double sigma2 = o.sigma2_opt ? *o.sigma2_opt : estimate_noise_variance(eig, 0);
    const NoiseModel unit(n, window_len, 1.0, tab.field);
    const ThresholdCache cache(n, window_len, tab.field, schedule(o, n), relative_lambda0(o, unit));
    const auto seq = cache.at(sigma2);
    const auto est = estimate_rank(eig, seq);

    std::cout << "n = " << n << "\nN = " << window_len << "\nbeta = " << beta_of(tab.field)
              << "\nsigma2 = " << format_number(sigma2) << "\nlambda0 = " << format_number(seq.lambda0)
              << "\nrank = " << est.rank << '\n';
    std::optional<RankEstimate> kn;
    if (o.false_alarm) {
        kn = kn_estimate_rank(eig, unit.with_sigma2(sigma2), *o.false_alarm);
        std::cout << "rank_kn = " << kn->rank << "\nT_kn = "
                  << format_number(kn_threshold(unit.with_sigma2(sigma2), *o.false_alarm)) << '\n';
    }
    std::cout << "i,ell,T,exceeds\n";
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < n; ++i) {
        std::cout << i + 1 << ',' << format_number(eig.values[i]) << ',' << format_number(seq[i]) << ','
                  << (est.exceeds[i] ? 1 : 0) << '\n';
        rows.push_back({static_cast<double>(i + 1), eig.values[i], seq[i], est.exceeds[i] ? 1.0 : 0.0});
    }
    if (!o.out.empty()) {
        std::ostringstream csv;
        io::write_table(csv, {"i", "ell", "T", "exceeds"}, rows);
        write_file(o.out, csv.str());
    }
    return 0;
}

Scenario load(const Options& o) {
    auto sc = io::load_scenario(o.scenario);
    if (o.seed) sc.seed = *o.seed;
    return sc;
}

TrackingOptions tracking_options(const Options& o, std::size_t n, std::size_t window) {
    TrackingOptions t;
    t.kn_false_alarm = o.false_alarm ? *o.false_alarm : 0.005;
    t.relative_lambda0 = relative_lambda0(o, NoiseModel(n, window, 1.0));
    return t;
}

int cmd_simulate(const Options& o) {
    const auto sc = load(o);
    const auto trace = run_tracking(sc, schedule(o, sc.n), tracking_options(o, sc.n, sc.window));
    const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
    std::ostringstream csv;
    io::write_trace(csv, trace);
    write_file(dir / "trace.csv", csv.str());

    io::Series r{"r", {}, {}, {}}, mm{"minimax", {}, {}, {}}, kn{"KN", {}, {}, {}};
    io::Series er{"k = r", {}, {}, {}}, emm{"k = minimax", {}, {}, {}};
    for (const auto& rec : trace.records) {
        for (auto* s : {&r, &mm, &kn, &er, &emm}) s->x.push_back(rec.time);
        r.y.push_back(static_cast<double>(rec.r));
        mm.y.push_back(static_cast<double>(rec.rhat_mm));
        kn.y.push_back(static_cast<double>(rec.rhat_kn));
        er.y.push_back(rec.err_r);
        emm.y.push_back(rec.err_rhat_mm);
    }
    write_file(dir / "rank.svg", io::svg_line_chart("Rank", "t", "rank", {r, mm, kn}));
    write_file(dir / "subspace_error.svg", io::svg_line_chart("Subspace error", "t", "error", {er, emm}));
    std::cout << "steps = " << trace.records.size() << "\nrank_error_mm = "
              << format_number(rank_error(trace, Estimator::minimax))
              << "\nrank_error_kn = " << format_number(rank_error(trace, Estimator::kn)) << '\n';
    return 0;
}

int cmd_sweep(const Options& o) {
    const auto sc = load(o);
    for (double r : o.rates) {
        if (!(r > 0.0)) throw DomainError("--rates must all be positive");
    }
    if (o.replicates == 0) throw DomainError("--replicates must be at least 1");
    auto topt = tracking_options(o, sc.n, sc.window);
    const auto rows = sweep_sampling_rate(sc, o.rates, o.replicates, schedule(o, sc.n), topt);
    const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
    std::ostringstream csv;
    io::write_sweep(csv, rows);
    write_file(dir / "sweep.csv", csv.str());
    io::Series mm{"minimax", {}, {}, {}}, kn{"KN", {}, {}, {}};
    for (const auto& row : rows) {
        mm.x.push_back(row.rate);
        mm.y.push_back(row.mm_mean);
        mm.err.push_back(row.mm_sd);
        kn.x.push_back(row.rate);
        kn.y.push_back(row.kn_mean);
        kn.err.push_back(row.kn_sd);
    }
    write_file(dir / "sweep.svg", io::svg_line_chart("Rank error vs sampling rate", "rate", "error", {mm, kn}));
    std::cout << csv.str();
    return 0;
}

void model_flags(CLI::App* c, Options& o) {
    c->add_option("--beta", o.beta, "1 for real data, 2 for complex")->check(CLI::IsMember({1, 2}));
    c->add_option("--n", o.n, "dimension")->check(CLI::PositiveNumber);
    c->add_option("--N", o.N, "window length")->check(CLI::PositiveNumber);
    c->add_option("--sigma2", o.sigma2, "noise variance")->check(CLI::PositiveNumber);
}

void cost_flags(CLI::App* c, Options& o) {
    c->add_option("--lambda0", o.lambda0, "minimal signal strength in units of sigma^2 (default sqrt(n/N) + N^{-1/3})");
    c->add_option("--ci", o.ci, "inclusion cost c_I");
    c->add_option("--ce", o.ce, "exclusion cost c_E(i), the same for every i");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Minimax rank estimation for spiked covariance models"};
    app.require_subcommand(1);
    Options o;

    auto* tw = app.add_subcommand("tw", "Tracy-Widom CDF/density table as CSV (s,F1,f1,F2,f2)");
    tw->add_option("--from", o.from, "first abscissa");
    tw->add_option("--to", o.to, "last abscissa");
    tw->add_option("--step", o.step, "spacing");
    tw->add_option("--out", o.out, "CSV path (default stdout)");
    tw->add_option("--svg", o.svg, "also write the densities as SVG");

    auto* th = app.add_subcommand("threshold", "minimax threshold for one inclusion test");
    model_flags(th, o);
    cost_flags(th, o);
    th->add_flag("--lemma1", o.lemma1, "also print the small-h approximation (h = o(N^{-1/3}))");
    th->add_flag("--lemma2", o.lemma2, "also print the h = h0 N^{-1/3} approximation and its limits");

    auto* rk = app.add_subcommand("rank", "estimate the rank from a snapshot CSV");
    rk->add_option("--input", o.input, "snapshot CSV (t,re_0,im_0,... or t,x_0,...)")->required();
    rk->add_option("--N", o.rank_window, "use only the last N snapshots (0 = all)");
    rk->add_option("--sigma2", o.sigma2_opt, "noise variance (default: mean eigenvalue)");
    cost_flags(rk, o);
    rk->add_option("--rmax", o.rmax, "largest rank considered");
    rk->add_option("--false-alarm", o.false_alarm, "also report the fixed false-alarm estimate");
    rk->add_option("--out", o.out, "write the per-index table as CSV");

    auto* sim = app.add_subcommand("simulate", "run one tracking simulation");
    auto* sw = app.add_subcommand("sweep", "rank error against snapshot sampling rate");
    for (auto* c : {sim, sw}) {
        c->add_option("--scenario", o.scenario, "scenario file")->required();
        cost_flags(c, o);
        c->add_option("--rmax", o.rmax, "largest rank considered");
        c->add_option("--false-alarm", o.false_alarm, "false alarm rate of the baseline (default 0.005)");
        c->add_option("--seed", o.seed, "override the scenario seed");
        c->add_option("--out", o.out, "output directory (default .)");
    }
    sw->add_option("--rates", o.rates, "sampling rates")->delimiter(',');
    sw->add_option("--replicates", o.replicates, "replicates per rate");

    CLI11_PARSE(app, argc, argv);

    try {
        if (tw->parsed()) return cmd_tw(o);
        if (th->parsed()) return cmd_threshold(o);
        if (rk->parsed()) return cmd_rank(o);
        if (sim->parsed()) return cmd_simulate(o);
        if (sw->parsed()) return cmd_sweep(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
