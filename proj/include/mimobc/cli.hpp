#pragma once
// Command-line front end. run_command returns 0 on success or a passed verification,
// 1 on a failed verification and 2 on usage or validation errors.

#include "mimobc/enhancement.hpp"
#include "mimobc/io.hpp"
#include "mimobc/region.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <ostream>
#include <string>
#include <vector>

namespace mimobc::cli {

enum ExitCode : int { kOk = 0, kFail = 1, kUsage = 2 };

struct Flags {
    std::string channel;
    double mu1 = 0.0;
    double mu2 = 0.0;
    std::string order = "12";
    std::string scheme = "sdpc";
    int grid = 0;  // 0: subcommand default
    int restarts = OptOptions{}.restarts;
    std::uint64_t seed = 0;
    double tol = OptOptions{}.tol;
    std::string out;
    std::string format = "csv";
    std::string emit_plot;
    std::string k1, k2;
    int candidates = 1000;
};

namespace detail {

inline OptOptions opt_options(const Flags& f) {
    OptOptions o;
    o.restarts = f.restarts;
    o.seed = f.seed;
    o.tol = f.tol;
    return o;
}

inline RegionOptions region_options(const Flags& f) {
    RegionOptions r;
    r.opt = opt_options(f);
    return r;
}

inline std::string kv(const std::string& key, double v) { return key + "=" + format_number(v) + "\n"; }

inline std::string matrix_text(const Matrix& m) { return round12(mimobc::detail::matrix_json(m)).dump(); }

inline const char* verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

inline void export_samples(const Flags& f, const std::vector<RegionSample>& samples,
                           std::ostream& out) {
    const std::string body = f.format == "json" ? samples_json(samples) : samples_csv(samples);
    if (f.out.empty())
        out << body;
    else
        write_file(f.out, body);
    if (!f.emit_plot.empty()) {
        std::string data = f.out;
        if (data.empty() || f.format == "json") {
            data = f.emit_plot + ".csv";
            write_file(data, samples_csv(samples));
        }
        write_file(f.emit_plot, plot_script(data));
    }
}

inline int cmd_rates(const Flags& f, std::ostream& out) {
    const auto model = parse_channel_file(f.channel);
    CovariancePair p = CovariancePair::zero(model.t);
    if (!f.k1.empty()) p.K1 = parse_matrix_file(f.k1);
    if (!f.k2.empty()) p.K2 = parse_matrix_file(f.k2);
    const Weights w{f.mu1, f.mu2};
    require_weights(w);
    const auto t = rate_triple(model, p, parse_scheme(f.scheme), parse_order(f.order));
    out << kv("r01", t.r01) << kv("r02", t.r02) << kv("r1_raw", t.r1_raw) << kv("r2_raw", t.r2_raw)
        << kv("r0", t.r0) << kv("r1", t.r1) << kv("r2", t.r2)
        << kv("objective", weighted_value(t, w));
    return kOk;
}

inline void print_result(const OptResult& r, std::ostream& out) {
    out << kv("mu1", r.weights.mu1) << kv("mu2", r.weights.mu2) << kv("r01", r.triple.r01)
        << kv("r02", r.triple.r02) << kv("r1_raw", r.triple.r1_raw)
        << kv("r2_raw", r.triple.r2_raw) << kv("r0", r.triple.r0) << kv("r1", r.triple.r1)
        << kv("r2", r.triple.r2) << kv("objective", r.objective)
        << "converged=" << (r.converged ? "true" : "false") << "\n"
        << "K1=" << matrix_text(r.pair.K1) << "\n"
        << "K2=" << matrix_text(r.pair.K2) << "\n";
}

inline int cmd_optimize(const Flags& f, std::ostream& out) {
    const auto model = parse_channel_file(f.channel);
    const Scheme scheme = parse_scheme(f.scheme);
    const Order order = parse_order(f.order);
    const auto r = maximize_weighted(model, {f.mu1, f.mu2}, scheme, order, opt_options(f));
    if (!f.out.empty() || !f.emit_plot.empty()) {
        Flags g = f;
        export_samples(g, {make_sample(r, scheme, order)}, out);
    }
    print_result(r, out);
    return kOk;
}

inline int cmd_trace(const Flags& f, std::ostream& out) {
    const auto model = parse_channel_file(f.channel);
    const Scheme scheme = parse_scheme(f.scheme);
    std::vector<Order> orders;
    if (f.order == "both")
        orders = {Order::O12, Order::O21};
    else
        orders = {parse_order(f.order)};
    const auto grid = default_weight_grid(f.grid > 0 ? f.grid : 7);
    std::vector<RegionSample> samples;
    for (Order o : orders) {
        auto part = trace_boundary(model, scheme, o, grid, region_options(f));
        samples.insert(samples.end(), part.begin(), part.end());
    }
    export_samples(f, samples, out);
    return kOk;
}

inline int cmd_verify_kkt(const Flags& f, std::ostream& out) {
    const auto model = parse_channel_file(f.channel);
    const auto r = maximize_weighted(model, {f.mu1, f.mu2}, Scheme::SDPC, parse_order(f.order),
                                     opt_options(f));
    const auto c = recover_kkt_sdpc(model, r.pair, r.weights, r.triple);
    out << kv("objective", r.objective) << kv("lambda", c.lambda)
        << kv("residual_stationarity", c.residual_stationarity)
        << kv("residual_slackness", c.residual_slackness)
        << kv("min_multiplier_eigenvalue", c.min_multiplier_eigenvalue)
        << "lambda_rule_ok=" << (c.lambda_rule_ok ? "true" : "false") << "\n"
        << "tie=" << (c.tie ? "true" : "false") << "\n"
        << "M1=" << matrix_text(c.M1) << "\n"
        << "M2=" << matrix_text(c.M2) << "\n"
        << "MS=" << matrix_text(c.MS) << "\n"
        << verdict(c.accepted()) << "\n";
    return c.accepted() ? kOk : kFail;
}

inline int cmd_verify_enhancement(const Flags& f, std::ostream& out) {
    const auto model = parse_channel_file(f.channel);
    const auto r = maximize_weighted(model, {f.mu1, f.mu2}, Scheme::SDPC, parse_order(f.order),
                                     opt_options(f));
    const auto pl = run_converse_pipeline(model, r);
    const auto& e = pl.enhanced;
    bool ok = pl.certificate.accepted();
    out << "kkt=" << verdict(ok) << "\n";
    out << "sigma_tilde=" << matrix_text(e.sigma_tilde) << "\n";
    for (const auto& c : e.property_report.checks)
        out << c.name << ": residual=" << format_number(c.residual) << " " << verdict(c.passed)
            << "\n";
    ok = ok && e.property_report.all_passed();
    const auto& id = pl.identities;
    out << kv("r1_formula", id.r1_formula) << kv("r1_enhanced", id.r1_enhanced)
        << kv("r2_formula", id.r2_formula) << kv("r2_enhanced", id.r2_enhanced)
        << "identities=" << verdict(id.passed()) << "\n";
    ok = ok && id.passed();
    const bool closure_ok = pl.closure.gap() <= 1e-6;
    out << kv("closure_formula", pl.closure.formula) << kv("closure_assembled", pl.closure.assembled)
        << "closure=" << verdict(closure_ok) << "\n";
    ok = ok && closure_ok;
    const auto sweep = extremal_sweep(pl.extremal, e.model, e.sigma_tilde, f.candidates, f.seed);
    const bool ext_ok = sweep.min_gap >= -1e-9 && std::abs(sweep.gap_at_kstar) <= 1e-10;
    out << kv("extremal_min_gap", sweep.min_gap) << kv("extremal_gap_at_kstar", sweep.gap_at_kstar)
        << "extremal=" << verdict(ext_ok) << "\n";
    ok = ok && ext_ok;
    out << verdict(ok) << "\n";
    return ok ? kOk : kFail;
}

inline int cmd_verify_invariance(const Flags& f, std::ostream& out) {
    const auto model = parse_channel_file(f.channel);
    const auto rep = support_gap(model, default_weight_grid(f.grid > 0 ? f.grid : 7),
                                 region_options(f), parse_scheme(f.scheme));
    out << "mu1,mu2,support12,support21,gap\n";
    for (const auto& e : rep.entries)
        out << format_number(e.weights.mu1) << "," << format_number(e.weights.mu2) << ","
            << format_number(e.support12) << "," << format_number(e.support21) << ","
            << format_number(e.gap) << "\n";
    out << kv("max_gap", rep.max_gap) << verdict(rep.passed()) << "\n";
    return rep.passed() ? kOk : kFail;
}

inline int cmd_verify_ns(const Flags& f, std::ostream& out) {
    const auto model = parse_channel_file(f.channel);
    const auto rep = ns_correspondence_check(model, {f.mu1, f.mu2}, region_options(f));
    out << kv("mu0_prime", rep.mu0_prime) << kv("mu_prime", rep.mu_prime)
        << kv("sdpc_objective", rep.sdpc_objective);
    if (rep.kkt_skipped)
        out << "kkt=SKIPPED\n";
    else
        out << kv("kkt_residual", rep.kkt_residual) << kv("gamma", rep.gamma)
            << "kkt=" << verdict(rep.kkt_ok) << "\n";
    out << kv("ns_support12", rep.ns_support12) << kv("ns_support21", rep.ns_support21)
        << kv("ns_gap", rep.ns_gap) << verdict(rep.passed()) << "\n";
    return rep.passed() ? kOk : kFail;
}

inline int cmd_oracle_scalar(const Flags& f, std::ostream& out) {
    const auto model = parse_channel_file(f.channel);
    const auto r = scalar_grid_oracle(model, {f.mu1, f.mu2}, parse_scheme(f.scheme),
                                      parse_order(f.order), f.grid > 0 ? f.grid : 2001);
    print_result(r, out);
    return kOk;
}

}  // namespace detail

inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Gaussian MIMO broadcast channel with common and confidential messages"};
    app.name("mimobc");
    app.require_subcommand(1);
    Flags f;

    auto add_channel = [&](CLI::App* s) {
        s->add_option("--channel", f.channel, "channel-spec JSON file")->required();
    };
    auto add_weights = [&](CLI::App* s) {
        s->add_option("--mu1", f.mu1, "weight of user 1's confidential rate");
        s->add_option("--mu2", f.mu2, "weight of user 2's confidential rate");
    };
    auto add_order = [&](CLI::App* s, bool allow_both) {
        auto* o = s->add_option("--order", f.order, "encoding order");
        o->check(allow_both ? CLI::IsMember({"12", "21", "both"}) : CLI::IsMember({"12", "21"}));
    };
    auto add_scheme = [&](CLI::App* s) {
        s->add_option("--scheme", f.scheme, "sdpc or nsdpc")->check(CLI::IsMember({"sdpc", "nsdpc"}));
    };
    auto add_opt = [&](CLI::App* s) {
        s->add_option("--restarts", f.restarts, "random starts of the optimizer")
            ->check(CLI::NonNegativeNumber);
        s->add_option("--seed", f.seed, "random seed");
        s->add_option("--tol", f.tol, "final barrier gap of the optimizer")
            ->check(CLI::PositiveNumber);
    };
    auto add_export = [&](CLI::App* s) {
        s->add_option("--out", f.out, "output file (default: standard output)");
        s->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        s->add_option("--emit-plot", f.emit_plot, "write a matplotlib script for the samples");
    };
    auto add_grid = [&](CLI::App* s, const std::string& help) {
        s->add_option("--grid", f.grid, help)->check(CLI::PositiveNumber);
    };

    auto* rates = app.add_subcommand("rates", "rate triple at given covariances");
    add_channel(rates);
    add_weights(rates);
    add_order(rates, false);
    add_scheme(rates);
    rates->add_option("--k1", f.k1, "JSON matrix file for K1 (default 0)");
    rates->add_option("--k2", f.k2, "JSON matrix file for K2 (default 0)");

    auto* optimize = app.add_subcommand("optimize", "maximize the weighted sum rate");
    add_channel(optimize);
    add_weights(optimize);
    add_order(optimize, false);
    add_scheme(optimize);
    add_opt(optimize);
    add_export(optimize);

    auto* trace = app.add_subcommand("trace", "support-function samples over the weight grid");
    add_channel(trace);
    add_order(trace, true);
    add_scheme(trace);
    add_opt(trace);
    add_export(trace);
    add_grid(trace, "points per weight axis (default 7)");

    auto* vkkt = app.add_subcommand("verify-kkt", "KKT certificate at the optimum");
    add_channel(vkkt);
    add_weights(vkkt);
    add_order(vkkt, false);
    add_opt(vkkt);

    auto* venh = app.add_subcommand("verify-enhancement", "enhanced noise and converse checks");
    add_channel(venh);
    add_weights(venh);
    add_order(venh, false);
    add_opt(venh);
    venh->add_option("--candidates", f.candidates, "random candidates for the extremal check")
        ->check(CLI::NonNegativeNumber);

    auto* vinv = app.add_subcommand("verify-invariance", "support gap between encoding orders");
    add_channel(vinv);
    add_scheme(vinv);
    add_opt(vinv);
    add_grid(vinv, "points per weight axis (default 7)");

    auto* vns = app.add_subcommand("verify-ns", "S-DPC / NS-DPC sum-rate correspondence");
    add_channel(vns);
    add_weights(vns);
    add_opt(vns);

    auto* oracle = app.add_subcommand("oracle-scalar", "exhaustive grid search, scalar channels");
    add_channel(oracle);
    add_weights(oracle);
    add_order(oracle, false);
    add_scheme(oracle);
    add_grid(oracle, "grid points per axis (default 2001)");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    }

    try {
        if (rates->parsed()) return detail::cmd_rates(f, out);
        if (optimize->parsed()) return detail::cmd_optimize(f, out);
        if (trace->parsed()) return detail::cmd_trace(f, out);
        if (vkkt->parsed()) return detail::cmd_verify_kkt(f, out);
        if (venh->parsed()) return detail::cmd_verify_enhancement(f, out);
        if (vinv->parsed()) return detail::cmd_verify_invariance(f, out);
        if (vns->parsed()) return detail::cmd_verify_ns(f, out);
        if (oracle->parsed()) return detail::cmd_oracle_scalar(f, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
    err << app.help();
    return kUsage;
}

}  // namespace mimobc::cli
