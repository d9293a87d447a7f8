#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "chain_file.hpp"
#include "cyclecirc/entropy.hpp"
#include "cyclecirc/exact.hpp"
#include "cyclecirc/fluctuation.hpp"
#include "cyclecirc/haldane.hpp"
#include "cyclecirc/report.hpp"
#include "cyclecirc/scgf.hpp"
#include "cyclecirc/simulate.hpp"

namespace {

using namespace cyclecirc;
using cli::ChainFile;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitRejected = 2;

struct CommonArgs {
    std::string chain_path;
    std::string cycles_text;
    std::string start_label;
    double t = 0.0;
    long long steps = 0;
    long long replicas = 10000;
    std::uint64_t seed = 0;
    std::string mode = "exact";
    std::string lambda_grid = "-1:1:0.25";
    std::string x_grid;
    int caps = 20;
    std::string out;
    bool renormalize = false;
};

void write_output(const std::string& out, const std::string& content) {
    if (out.empty()) {
        std::cout << content;
        if (!content.empty() && content.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) raise("ParseError", "cannot write '" + out + "'");
    f << content;
}

int resolve_start(const ChainFile& file, const std::string& label) {
    if (!label.empty()) return file.chain.states().index(label);
    if (file.start) return *file.start;
    return 0;
}

std::vector<Cycle> resolve_cycles(const ChainFile& file, const std::string& text) {
    if (text.empty()) raise("BadCycle", "this command needs --cycles");
    return parse_cycle_list(text, file.chain.states());
}

double resolve_horizon(const ChainFile& file, const CommonArgs& args) {
    bool continuous = file.chain.kind() == ChainKind::ctmc;
    if (continuous) {
        if (args.t <= 0.0) raise("BadHorizon", "a CTMC needs --t > 0");
        return args.t;
    }
    if (args.steps <= 0) raise("BadHorizon", "a DTMC needs --steps > 0");
    return static_cast<double>(args.steps);
}

TestMode resolve_mode(const std::string& mode) {
    if (mode == "exact") return TestMode::exact;
    if (mode == "mc") return TestMode::mc;
    raise("BadMode", "--mode must be 'exact' or 'mc'");
}

int cmd_validate(const CommonArgs& args, int max_cycle_len) {
    ChainFile file = cli::load_chain_file(args.chain_path, args.renormalize);
    json j;
    j["command"] = "validate";
    j["version"] = std::string(kLibraryVersion);
    j["input_digest"] = file.digest;
    j["kind"] = file.chain.kind() == ChainKind::ctmc ? "ctmc" : "dtmc";
    j["states"] = file.chain.states().labels();
    j["irreducible"] = true; // validation would have failed otherwise
    auto rev = kolmogorov_reversible(file.chain, max_cycle_len);
    j["reversible"] = rev.reversible;
    if (rev.witness) j["witness"] = format_cycle(*rev.witness, file.chain.states());
    if (!args.cycles_text.empty()) {
        j["cycles"] = json::array();
        for (const auto& c : resolve_cycles(file, args.cycles_text)) {
            json e;
            e["cycle"] = format_cycle(c, file.chain.states());
            e["strength"] = cycle_strength(file.chain, c);
            e["reverse_strength"] = cycle_strength(file.chain, c.reversed());
            if (e["strength"].get<double>() > 0.0) e["affinity"] = cycle_affinity(file.chain, c);
            j["cycles"].push_back(std::move(e));
        }
    }
    write_output(args.out, j.dump(2) + "\n");
    return kExitOk;
}

int cmd_simulate(const CommonArgs& args) {
    ChainFile file = cli::load_chain_file(args.chain_path, args.renormalize);
    auto cycles = args.cycles_text.empty() ? std::vector<Cycle>{}
                                           : resolve_cycles(file, args.cycles_text);
    double horizon = resolve_horizon(file, args);
    BatchOptions opt;
    opt.replicas = args.replicas;
    opt.seed = args.seed;
    opt.keep_events = true;
    auto batch = batch_sample(file.chain, resolve_start(file, args.start_label), horizon, cycles, opt);
    std::ostringstream csv;
    csv << "replica,time,cycle\n";
    for (std::size_t r = 0; r < batch.event_logs.size(); ++r)
        for (const auto& ev : batch.event_logs[r].events)
            csv << r << ',' << format_double(ev.time) << ','
                << format_cycle(ev.cycle, file.chain.states()) << "\n";
    write_output(args.out, csv.str());
    return kExitOk;
}

int cmd_haldane(const CommonArgs& args) {
    ChainFile file = cli::load_chain_file(args.chain_path, args.renormalize);
    auto family = resolve_cycles(file, args.cycles_text);
    int start = resolve_start(file, args.start_label);
    TestMode mode = resolve_mode(args.mode);
    HaldaneParams params;
    if (args.steps > 0) params.n_max = static_cast<int>(args.steps);
    params.replicas = args.replicas;
    params.seed = args.seed;

    auto haldane = haldane_test(file.chain, family, start, mode, params);
    json doc;
    doc["command"] = "haldane";
    doc["haldane"] = json::parse(haldane.to_json(file.digest));
    bool rejected = haldane.rejected;
    try {
        auto indep = independence_test(file.chain, family, start, mode, params);
        doc["independence"] = json::parse(indep.to_json(file.digest));
        rejected = rejected || indep.rejected;
    } catch (const Error& e) {
        doc["independence"] = {{"skipped", e.what()}};
    }
    write_output(args.out, doc.dump(2) + "\n");
    return rejected ? kExitRejected : kExitOk;
}

int cmd_ft(const CommonArgs& args) {
    ChainFile file = cli::load_chain_file(args.chain_path, args.renormalize);
    auto cycles = resolve_cycles(file, args.cycles_text);
    int start = resolve_start(file, args.start_label);
    double horizon = resolve_horizon(file, args);
    TestMode mode = resolve_mode(args.mode);
    FtParams params;
    params.caps = {args.caps};
    params.replicas = args.replicas;
    params.seed = args.seed;

    auto transient = transient_ft(file.chain, cycles, start, horizon, TestMode::exact, params);
    auto integral = integral_ft(file.chain, cycles, start, horizon, mode, params);
    // same scalar grid on every tracked coordinate
    std::vector<std::vector<double>> grid;
    std::size_t tracked = cycles.size() - transient.skipped.size();
    for (double l : cli::parse_grid(args.lambda_grid))
        grid.emplace_back(tracked, l);
    auto klsp = klsp_check(file.chain, cycles, start, horizon, grid, params);

    json doc;
    doc["command"] = "ft";
    doc["transient"] = json::parse(transient.to_json(file.digest));
    doc["integral"] = json::parse(integral.to_json(file.digest));
    doc["klsp"] = json::parse(klsp.to_json(file.digest));
    write_output(args.out, doc.dump(2) + "\n");
    return transient.passed && integral.passed && klsp.passed ? kExitOk : kExitRejected;
}

int cmd_scgf(const CommonArgs& args, bool net) {
    ChainFile file = cli::load_chain_file(args.chain_path, args.renormalize);
    auto cycles = resolve_cycles(file, args.cycles_text);
    if (cycles.size() != 1)
        raise("BadCycle", "scgf tracks one cycle; pass a single --cycles entry");
    int start = resolve_start(file, args.start_label);
    double horizon = resolve_horizon(file, args);

    BatchOptions opt;
    opt.replicas = args.replicas;
    opt.seed = args.seed;
    auto batch = batch_sample(file.chain, start, horizon, cycles, opt);
    std::vector<std::vector<double>> obs;
    obs.reserve(batch.samples.size());
    for (const auto& s : batch.samples)
        obs.push_back({net ? s.net_circulation(0) : s.circulation(0)});

    std::vector<std::vector<double>> grid;
    for (double l : cli::parse_grid(args.lambda_grid)) grid.push_back({l});
    auto est = scgf_estimate(obs, horizon, grid);

    std::ostringstream csv;
    csv << "# observable=" << (net ? "net_circulation" : "circulation")
        << " cycle=" << format_cycle(cycles[0], file.chain.states())
        << " t=" << format_double(horizon) << " replicas=" << args.replicas
        << " seed=" << args.seed << " digest=" << file.digest << "\n";
    csv << "lambda,value,std_error,ess\n";
    for (std::size_t g = 0; g < grid.size(); ++g)
        csv << format_double(grid[g][0]) << ',' << format_double(est.value[g]) << ','
            << format_double(est.std_error[g]) << ',' << format_double(est.ess[g]) << "\n";
    write_output(args.out, csv.str());
    return kExitOk;
}

int cmd_rate(const CommonArgs& args, bool net, const std::string& symmetry_out) {
    ChainFile file = cli::load_chain_file(args.chain_path, args.renormalize);
    auto cycles = resolve_cycles(file, args.cycles_text);
    if (cycles.size() != 1) raise("BadCycle", "rate tracks one cycle; pass a single --cycles entry");
    int start = resolve_start(file, args.start_label);
    double horizon = resolve_horizon(file, args);
    if (args.x_grid.empty()) raise("EmptyGrid", "rate needs --x-grid");

    BatchOptions opt;
    opt.replicas = args.replicas;
    opt.seed = args.seed;
    auto batch = batch_sample(file.chain, start, horizon, cycles, opt);
    std::vector<std::vector<double>> obs;
    obs.reserve(batch.samples.size());
    for (const auto& s : batch.samples)
        obs.push_back({net ? s.net_circulation(0) : s.circulation(0)});

    std::vector<std::vector<double>> lgrid;
    for (double l : cli::parse_grid(args.lambda_grid)) lgrid.push_back({l});
    auto f = scgf_estimate(obs, horizon, lgrid);
    std::vector<std::vector<double>> xgrid;
    for (double x : cli::parse_grid(args.x_grid)) xgrid.push_back({x});
    auto rate = legendre_fenchel(f, xgrid);

    std::ostringstream csv;
    csv << "# observable=" << (net ? "net_circulation" : "circulation")
        << " cycle=" << format_cycle(cycles[0], file.chain.states())
        << " t=" << format_double(horizon) << " replicas=" << args.replicas
        << " seed=" << args.seed << " digest=" << file.digest
        << " convex=" << (rate.convex_ok ? "yes" : "no") << "\n";
    csv << "x,I,std_error\n";
    for (std::size_t g = 0; g < xgrid.size(); ++g)
        csv << format_double(xgrid[g][0]) << ',' << format_double(rate.value[g]) << ','
            << format_double(rate.std_error[g]) << "\n";
    write_output(args.out, csv.str());

    bool rejected = false;
    if (net && !symmetry_out.empty()) {
        RateSymmetryParams sp;
        sp.replicas = args.replicas;
        sp.seed = args.seed;
        auto lambda = cli::parse_grid(args.lambda_grid);
        auto xs = cli::parse_grid(args.x_grid);
        auto report = rate_symmetry_check(file.chain, cycles[0], start, horizon, lambda, xs, sp);
        write_output(symmetry_out, report.to_json(file.digest) + "\n");
        rejected = !report.passed;
    }
    return rejected ? kExitRejected : kExitOk;
}

int cmd_exact(const CommonArgs& args, const std::string& forming_out) {
    ChainFile file = cli::load_chain_file(args.chain_path, args.renormalize);
    auto cycles = resolve_cycles(file, args.cycles_text);
    int start = resolve_start(file, args.start_label);
    double horizon = resolve_horizon(file, args);

    auto dist = exact_count_dist(file.chain, cycles, start, horizon,
                                 std::vector<int>{args.caps});
    std::ostringstream csv;
    dump_count_dist_csv(dist, csv);
    write_output(args.out, csv.str());

    if (!forming_out.empty()) {
        auto forming = exact_forming_dist(file.chain.embedded(), cycles, start,
                                          args.steps > 0 ? static_cast<int>(args.steps) : 200);
        std::ostringstream fcsv;
        fcsv << "# start=" << file.chain.states().label(start)
             << " tail_mass=" << format_double(forming.tail_mass()) << " digest=" << file.digest
             << "\n";
        fcsv << "cycle,n,probability\n";
        for (std::size_t k = 0; k < cycles.size(); ++k)
            for (int n = 1; n <= forming.n_max(); ++n) {
                double mass = forming.bucket(static_cast<int>(k), n);
                if (mass == 0.0) continue;
                fcsv << format_cycle(cycles[k], file.chain.states()) << ',' << n << ','
                     << format_double(mass) << "\n";
            }
        write_output(forming_out, fcsv.str());
    }
    return kExitOk;
}

int cmd_entropy(const CommonArgs& args, int checkpoints) {
    ChainFile file = cli::load_chain_file(args.chain_path, args.renormalize);
    if (file.chain.kind() != ChainKind::ctmc)
        raise("WrongKind", "entropy decomposition needs a CTMC");
    const auto& ctmc = file.chain.ctmc();
    int start = resolve_start(file, args.start_label);
    if (args.t <= 0.0) raise("BadHorizon", "entropy needs --t > 0");

    std::vector<double> p0(static_cast<std::size_t>(file.chain.size()), 0.0);
    p0[static_cast<std::size_t>(start)] = 1.0;

    std::ostringstream csv;
    csv << "# digest=" << file.digest << " seed=" << args.seed << " start="
        << file.chain.states().label(start) << "\n";
    csv << "replica,t,total,cycle_part,residual\n";
    for (long long r = 0; r < args.replicas; ++r) {
        Philox rng(args.seed, static_cast<std::uint64_t>(r));
        auto traj = simulate_ctmc(ctmc, start, args.t, rng);
        for (int k = 1; k <= checkpoints; ++k) {
            double t = args.t * static_cast<double>(k) / checkpoints;
            auto dec = entropy_decomposition(traj, ctmc, p0, t);
            csv << r << ',' << format_double(t) << ',' << format_double(dec.total) << ','
                << format_double(dec.cycle_part) << ',' << format_double(dec.residual) << "\n";
        }
    }
    write_output(args.out, csv.str());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cycle-resolved Markov chain simulation and symmetry checks"};
    app.require_subcommand(1);

    CommonArgs args;
    int max_cycle_len = 0;
    int checkpoints = 20;
    bool net = false;
    std::string forming_out;
    std::string symmetry_out;

    auto add_common = [&](CLI::App* cmd, bool needs_chain = true) {
        if (needs_chain) cmd->add_option("chain", args.chain_path, "chain spec file")->required();
        cmd->add_option("--cycles", args.cycles_text, "cycle list, e.g. \"(E,ES,EP),(E,EP,ES)\"");
        cmd->add_option("--start", args.start_label, "start state label");
        cmd->add_option("--t", args.t, "time horizon (CTMC)");
        cmd->add_option("--steps", args.steps, "step horizon (DTMC) or exact DP depth");
        cmd->add_option("--replicas", args.replicas, "Monte Carlo replicas");
        cmd->add_option("--seed", args.seed, "master seed");
        cmd->add_option("--mode", args.mode, "exact|mc");
        cmd->add_option("--lambda-grid", args.lambda_grid, "a:b:step");
        cmd->add_option("--x-grid", args.x_grid, "a:b:step");
        cmd->add_option("--caps", args.caps, "count-lattice cap per cycle");
        cmd->add_option("--out", args.out, "output path (default: stdout)");
        cmd->add_flag("--renormalize", args.renormalize, "fix row sums instead of rejecting");
    };

    auto* validate = app.add_subcommand("validate", "validate a chain file, check reversibility");
    add_common(validate);
    validate->add_option("--max-cycle-len", max_cycle_len, "cycle length bound (default: S)");

    auto* simulate = app.add_subcommand("simulate", "sample trajectories, emit the event CSV");
    add_common(simulate);

    auto* haldane = app.add_subcommand("haldane", "forming-time symmetry and independence tests");
    add_common(haldane);

    auto* ft = app.add_subcommand("ft", "transient, integral, and generating-function symmetries");
    add_common(ft);

    auto* scgf = app.add_subcommand("scgf", "empirical scaled cumulant generating function");
    add_common(scgf);
    scgf->add_flag("--net", net, "use the net circulation instead of the circulation");

    auto* rate = app.add_subcommand("rate", "rate function estimate (and symmetry check with --net)");
    add_common(rate);
    rate->add_flag("--net", net, "use the net circulation instead of the circulation");
    rate->add_option("--symmetry-report", symmetry_out, "write the symmetry verdict JSON here");

    auto* exact = app.add_subcommand("exact", "exact count-law oracle dump");
    add_common(exact);
    exact->add_option("--forming", forming_out, "also dump the forming-time table to this path");

    auto* entropy = app.add_subcommand("entropy", "entropy production decomposition series");
    add_common(entropy);
    entropy->add_option("--checkpoints", checkpoints, "time checkpoints per replica");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) return cmd_validate(args, max_cycle_len);
        if (simulate->parsed()) return cmd_simulate(args);
        if (haldane->parsed()) return cmd_haldane(args);
        if (ft->parsed()) return cmd_ft(args);
        if (scgf->parsed()) return cmd_scgf(args, net);
        if (rate->parsed()) return cmd_rate(args, net, symmetry_out);
        if (exact->parsed()) return cmd_exact(args, forming_out);
        if (entropy->parsed()) return cmd_entropy(args, checkpoints);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
