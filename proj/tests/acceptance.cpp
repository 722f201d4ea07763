// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails. Tolerances are fixed here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dem_oracle.hpp"
#include "formsim/cli.hpp"
#include "formsim/formsim.hpp"

namespace fs = std::filesystem;
using namespace formsim;

namespace {

constexpr double kOracleRelTol = 1e-6;
constexpr int kOracleGrid = 2001;
constexpr int kOracleStates = 100;
constexpr double kOracleSeconds = 30.0;
constexpr double kHoldSlack = 1e-12;
constexpr int kHoldStates = 10000;
constexpr double kRigidTol = 1e-9;
constexpr double kMaxPos = 0.12;   // m
constexpr double kMaxAng = 15.0;   // deg
constexpr double kMeanPos = 0.02;  // m
constexpr double kMeanAng = 2.0;   // deg
constexpr double kSweepSeconds = 60.0;
constexpr double kBlowUpFactor = 3.0 * 2.0;
constexpr std::size_t kRuns = 50;
constexpr std::uint64_t kSeed = 42;
constexpr std::size_t kProtocolCycles = 100000;

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct GroupResult {
    std::vector<ExperimentConfig> configs;
    std::vector<GroupSummary> summaries;
    double seconds = 0.0;
};

GroupResult run_group(Group g) {
    const auto t0 = std::chrono::steady_clock::now();
    Settings s;
    s.runs = kRuns;
    s.seed = kSeed;
    GroupResult r;
    r.configs = build_group(g, s);
    for (const auto& c : r.configs) {
        r.summaries.push_back(summarize(run_batch(c, 1), selected_cycles(c.schedule)));
    }
    r.seconds = seconds_since(t0);
    return r;
}

// Maxima within the envelope for every config; appends a description.
bool envelope(const GroupResult& r, std::string& detail, bool with_means) {
    bool ok = true;
    for (std::size_t i = 0; i < r.configs.size(); ++i) {
        const GroupSummary& s = r.summaries[i];
        ok = ok && s.max_abs_pos_err <= kMaxPos && s.max_abs_ang_err <= kMaxAng;
        detail += " " + r.configs[i].name + "{max_pos=" + fmt("%.4f", s.max_abs_pos_err) +
                  " max_ang=" + fmt("%.2f", s.max_abs_ang_err);
        if (with_means) {
            double worst_pos = 0.0, worst_ang = 0.0;
            for (const auto& c : s.cycles)
                for (const auto& sl : c.slaves) {
                    worst_pos = std::max(worst_pos, std::abs(sl.mean_pos));
                    worst_ang = std::max(worst_ang, std::abs(sl.mean_ang));
                }
            ok = ok && worst_pos <= kMeanPos && worst_ang <= kMeanAng;
            detail += " |mean_pos|<=" + fmt("%.4f", worst_pos) + " |mean_ang|<=" + fmt("%.2f", worst_ang);
        }
        detail += "}";
    }
    return ok;
}

Verdict oracle_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 gen(20240611);
    double worst = 0.0;
    int failures = 0;
    for (double p : {1.0, 0.7, 0.5}) {
        for (double rho : {0.0, 1.4153e-5}) {
            for (int k = 0; k < kOracleStates; ++k) {
                const test::DemCase c = test::random_case(gen, p, rho);
                const VelocityCommand u = dem_command(c.state, c.desired, c.params, c.timing);
                const double j = test::reference_objective(c, u);
                const test::DenseResult ref = test::dense_grid_minimize(c, kOracleGrid);
                const double rel = std::abs(j - ref.value) / ref.value;
                worst = std::max(worst, rel);
                if (rel > kOracleRelTol) ++failures;
            }
        }
    }
    const double secs = seconds_since(t0);
    return {failures == 0 && secs < kOracleSeconds,
            "600 states, worst |J-J_grid|/J_grid=" + fmt("%.3g", worst) +
                " failures=" + std::to_string(failures) + " time=" + fmt("%.1f", secs) + "s"};
}

Verdict never_worse_than_hold() {
    std::mt19937_64 gen(77);
    std::uniform_real_distribution<double> p(0.0, 1.0);
    int violations = 0;
    double worst = -1e300;
    for (int k = 0; k < kHoldStates; ++k) {
        const test::DemCase c = test::random_case(gen, p(gen), k % 2 ? 1.4153e-5 : 0.0);
        const DemObjective J(c.state, c.desired, c.params, c.timing);
        const VelocityCommand u = dem_command(c.state, c.desired, c.params, c.timing);
        const VelocityCommand hold =
            clamp_command(c.state.slave_prev_cmd, c.params.v_max, c.params.omega_max);
        const double gap = J(u) - J(hold);
        worst = std::max(worst, gap);
        if (gap > kHoldSlack) ++violations;
    }
    return {violations == 0, "10000 states, violations=" + std::to_string(violations) +
                                 " max J(u*)-J(hold)=" + fmt("%.3g", worst)};
}

Verdict rigid_translation() {
    Settings s;
    s.noise_enabled = false;
    s.rho = 0.0;
    s.runs = 1;
    ExperimentConfig c = make_config(s, "straight");
    c.schedule = straight_schedule(0.1, 0.1, 900);
    c.dem.omega_max = 0.15;
    const RunTrace t = run_simulation(c, 0);
    double worst = 0.0;
    for (const auto& e : t.samples) {
        worst = std::max({worst, std::abs(e.error.ex), std::abs(e.error.ey), std::abs(e.error.etheta)});
    }
    return {worst <= kRigidTol && t.cycles == 900,
            "900 cycles, max component error=" + fmt("%.3g", worst)};
}

Verdict comp1(const GroupResult& r) {
    std::string d;
    const bool ok = envelope(r, d, true);
    return {ok && r.seconds < kSweepSeconds, "time=" + fmt("%.1f", r.seconds) + "s" + d};
}

Verdict comp2(const GroupResult& r) {
    std::string d;
    bool ok = envelope(r, d, false);
    const GroupSummary& base = r.summaries.front();  // T = 0.05
    double ratio_pos = 0.0, ratio_ang = 0.0;
    for (const auto& s : r.summaries) {
        ratio_pos = std::max(ratio_pos, s.max_abs_pos_err / base.max_abs_pos_err);
        ratio_ang = std::max(ratio_ang, s.max_abs_ang_err / base.max_abs_ang_err);
    }
    const bool growth = ratio_pos <= kBlowUpFactor && ratio_ang <= kBlowUpFactor;
    return {ok && growth, "growth vs T=0.05: pos x" + fmt("%.2f", ratio_pos) + " ang x" +
                              fmt("%.2f", ratio_ang) + d};
}

PooledStat pos_stat(const GroupSummary& s) { return pooled_stat(selected_abs_pos(s)); }
PooledStat ang_stat(const GroupSummary& s) { return pooled_stat(selected_abs_ang(s)); }

double pooled_se(const PooledStat& a, const PooledStat& b) {
    return std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
}

Verdict rob1(const GroupResult& r) {
    std::string d;
    bool ok = envelope(r, d, false);
    bool trend = true;
    d += " mean|pos|:";
    for (std::size_t i = 0; i < r.summaries.size(); ++i) {
        const PooledStat a = pos_stat(r.summaries[i]);
        const PooledStat b = ang_stat(r.summaries[i]);
        d += " " + fmt("%.4f", a.mean) + "/" + fmt("%.2f", b.mean) + "deg";
        if (i > 0) {
            const PooledStat pa = pos_stat(r.summaries[i - 1]);
            const PooledStat pb = ang_stat(r.summaries[i - 1]);
            trend = trend && a.mean >= pa.mean - pooled_se(a, pa) && b.mean >= pb.mean - pooled_se(b, pb);
        }
    }
    return {ok && trend, std::string("trend ") + (trend ? "holds" : "broken") + d};
}

Verdict rob2(const GroupResult& unknown, const GroupResult& known) {
    std::string d;
    bool ok = envelope(unknown, d, false);
    bool order = true;
    for (std::size_t i = 0; i < unknown.summaries.size(); ++i) {
        const PooledStat a = pos_stat(unknown.summaries[i]), ka = pos_stat(known.summaries[i]);
        const PooledStat b = ang_stat(unknown.summaries[i]), kb = ang_stat(known.summaries[i]);
        order = order && a.mean >= ka.mean - pooled_se(a, ka) && b.mean >= kb.mean - pooled_se(b, kb);
        d += " p" + fmt("%g", unknown.configs[i].link.p_true) + "{unknown " + fmt("%.4f", a.mean) +
             " vs known " + fmt("%.4f", ka.mean) + "}";
    }
    return {ok && order, std::string("ordering ") + (order ? "holds" : "broken") + d};
}

Verdict protocol() {
    Settings s;
    s.runs = 1;
    s.seed = 3;
    std::string d;

    s.p_true = 0.0;
    s.p_assumed = 0.5;
    const RunTrace dead = run_simulation(make_config(s, "dead"), 0);
    bool frozen = true;
    for (const auto& c : dead.commands) {
        frozen = frozen && c.hold == VelocityCommand{} && c.hit == VelocityCommand{};
    }
    d += std::string("p=0 frozen=") + (frozen ? "yes" : "no");

    s.p_true = 1.0;
    s.p_assumed = 1.0;
    const ExperimentConfig live_cfg = make_config(s, "live");
    const RunTrace live = run_simulation(live_cfg, 0);
    bool delayed = true;
    for (std::size_t k = 0; k < live.cycles; ++k) {
        for (std::size_t i = 0; i < live.slaves; ++i) {
            const CommandRecord& c = live.commands[k * live.slaves + i];
            const VelocityCommand prev =
                k == 0 ? VelocityCommand{} : live.commands[(k - 1) * live.slaves + i].computed;
            delayed = delayed && c.hit == c.computed && c.hold == prev;
        }
    }
    // Switch instant inside the cycle.
    ProtocolState st(1);
    const CycleAdvance a = advance_cycle(st, {0.1, 0.0}, {{0.2, 0.1}}, {true}, live_cfg.timing);
    delayed = delayed && a.slaves[0].hold.duration == live_cfg.timing.d * live_cfg.timing.T &&
              std::abs(a.slaves[0].hold.duration + a.slaves[0].hit.duration - live_cfg.timing.T) < 1e-15;
    d += std::string(" p=1 delayed-by-dT=") + (delayed ? "yes" : "no");

    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0), prob(0.0, 1.0);
    const std::size_t n = 3;
    ProtocolState ps(n);
    RandomStream rng(5);
    std::size_t violations = 0;
    for (std::size_t k = 0; k < kProtocolCycles; ++k) {
        const LinkModel link{prob(gen)};
        std::vector<VelocityCommand> cmds(n);
        for (auto& c : cmds) c = {u(gen), u(gen)};
        const auto before = ps.executing;
        const auto delivered = sample_delivery(link, n, rng);
        const CycleAdvance out = advance_cycle(ps, {u(gen), u(gen)}, cmds, delivered, {0.1, 0.5});
        for (std::size_t i = 0; i < n; ++i) {
            const VelocityCommand want = delivered[i] ? cmds[i] : before[i];
            if (!(out.slaves[i].hold.cmd == before[i] && out.slaves[i].hit.cmd == want &&
                  ps.executing[i] == want)) {
                ++violations;
            }
        }
    }
    d += " hold-on-loss violations=" + std::to_string(violations) + "/" +
         std::to_string(kProtocolCycles) + " cycles";
    return {frozen && delayed && violations == 0, d};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Verdict determinism() {
    const fs::path root = fs::temp_directory_path() / "formsim_acceptance_determinism";
    fs::remove_all(root);
    std::ostringstream sink;
    int codes = 0;
    for (const char* sub : {"a", "b"}) {
        codes += run_cli({"--group", "comp1", "--seed", "42", "--runs", "50", "--out",
                          (root / sub).string()},
                         sink, sink);
    }
    bool same = codes == 0;
    std::size_t bytes = 0;
    for (const char* name : {"comp1_v0.05.csv", "comp1_v0.1.csv", "comp1_v0.2.csv"}) {
        const std::string a = slurp(root / "a" / name), b = slurp(root / "b" / name);
        same = same && !a.empty() && a == b;
        bytes += a.size();
    }
    fs::remove_all(root);
    return {same, std::to_string(bytes) + " CSV bytes compared, identical=" + (same ? "yes" : "no")};
}

}  // namespace

// With no arguments every criterion runs; otherwise only the listed ids (A1..A9).
int main(int argc, char** argv) {
    const std::vector<std::string> only(argv + 1, argv + argc);
    auto wanted = [&](const char* id) {
        return only.empty() || std::find(only.begin(), only.end(), id) != only.end();
    };
    std::map<Group, GroupResult> groups;
    auto group = [&](Group g) -> const GroupResult& {
        auto it = groups.find(g);
        if (it == groups.end()) it = groups.emplace(g, run_group(g)).first;
        return it->second;
    };

    int failed = 0, ran = 0;
    auto report = [&](const char* id, const char* name, const std::function<Verdict()>& check) {
        if (!wanted(id)) return;
        const Verdict v = check();
        std::printf("%s %s %s: %s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str());
        std::fflush(stdout);
        ++ran;
        if (!v.pass) ++failed;
    };

    report("A1", "dem-oracle-equivalence", oracle_equivalence);
    report("A2", "never-worse-than-hold", never_worse_than_hold);
    report("A3", "zero-noise-rigid-translation", rigid_translation);
    report("A4", "comp1-non-divergence-envelope", [&] { return comp1(group(Group::comp1)); });
    report("A5", "comp2-envelope-and-growth", [&] { return comp2(group(Group::comp2)); });
    report("A6", "rob1-envelope-and-trend", [&] { return rob1(group(Group::rob1)); });
    report("A7", "rob2-unknown-vs-known-p",
           [&] { return rob2(group(Group::rob2), group(Group::rob1)); });
    report("A8", "protocol-conformance", protocol);
    report("A9", "determinism", determinism);

    if (ran == 0) {
        std::fprintf(stderr, "no criterion matched\n");
        return 2;
    }
    std::printf("%d of %d criteria failed\n", failed, ran);
    return failed == 0 ? 0 : 1;
}
