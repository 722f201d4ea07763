#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <vector>

#include "formsim/scenario.hpp"

namespace formsim {

/// Cycles where the master's angular velocity changes fastest.
///
/// Keeps cycles whose |omega_k - omega_{k-1}| is in the top decile of all
/// non-zero changes, collapses each run of consecutive hits to its middle
/// cycle, and keeps at most one cycle per half-period.
inline std::vector<std::size_t> selected_cycles(const MasterSchedule& schedule) {
    const auto& cmds = schedule.commands;
    if (cmds.empty()) {
        throw std::domain_error("selected_cycles: empty schedule");
    }
    std::vector<double> delta(cmds.size(), 0.0);
    std::vector<double> nonzero;
    for (std::size_t k = 1; k < cmds.size(); ++k) {
        delta[k] = std::abs(cmds[k].omega - cmds[k - 1].omega);
        if (delta[k] > 1e-15) nonzero.push_back(delta[k]);
    }
    if (nonzero.empty()) return {};

    std::sort(nonzero.begin(), nonzero.end(), std::greater<>());
    const std::size_t rank = std::max<std::size_t>(1, (nonzero.size() + 9) / 10);
    const double threshold = nonzero[rank - 1] * (1.0 - 1e-9);

    // Middle of each run of consecutive qualifying cycles.
    std::vector<std::size_t> centers;
    std::size_t k = 1;
    while (k < cmds.size()) {
        if (delta[k] >= threshold && delta[k] > 1e-15) {
            std::size_t end = k;
            while (end + 1 < cmds.size() && delta[end + 1] >= threshold && delta[end + 1] > 1e-15) {
                ++end;
            }
            centers.push_back(k + (end - k) / 2);
            k = end + 1;
        } else {
            ++k;
        }
    }

    const std::size_t half = std::max<std::size_t>(1, schedule.period / 2);
    std::vector<std::size_t> out;
    for (std::size_t c : centers) {
        if (!out.empty() && out.back() / half == c / half) {
            if (delta[c] > delta[out.back()]) out.back() = c;
            continue;
        }
        out.push_back(c);
    }
    return out;
}

/// Cross-run samples of one slave at one selected cycle.
struct SlaveSamples {
    std::vector<double> pos_err;  // m
    std::vector<double> ang_err;  // deg, signed
    double mean_pos = 0.0;
    double mean_ang = 0.0;
};

struct CycleSamples {
    std::size_t cycle = 0;
    std::vector<SlaveSamples> slaves;  // index 0 is slave 1
};

/// Reduction of all runs of one configuration.
struct GroupSummary {
    double max_abs_pos_err = 0.0;  // m
    double max_abs_ang_err = 0.0;  // deg
    std::size_t runs = 0;
    std::vector<std::size_t> selected;
    std::vector<CycleSamples> cycles;
};

inline double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

/// Maxima over every sample plus raw per-run samples at the selected cycles.
/// Sample lists are ordered by run index, so the result does not depend on trace order.
inline GroupSummary summarize(const std::vector<RunTrace>& traces,
                              const std::vector<std::size_t>& cycles) {
    GroupSummary out;
    out.selected = cycles;
    out.runs = traces.size();
    if (traces.empty()) return out;

    const std::size_t n_cycles = traces.front().cycles;
    const std::size_t n_slaves = traces.front().slaves;
    std::vector<const RunTrace*> ordered;
    for (const auto& t : traces) {
        if (t.cycles != n_cycles || t.slaves != n_slaves || t.samples.size() != n_cycles * n_slaves) {
            throw std::domain_error("summarize: traces differ in shape");
        }
        ordered.push_back(&t);
    }
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const RunTrace* a, const RunTrace* b) { return a->run_index < b->run_index; });
    for (std::size_t c : cycles) {
        if (c >= n_cycles) throw std::domain_error("summarize: selected cycle outside trace");
    }

    for (const RunTrace* t : ordered) {
        for (const ErrorSample& s : t->samples) {
            out.max_abs_pos_err = std::max(out.max_abs_pos_err, std::abs(s.pos_err));
            out.max_abs_ang_err = std::max(out.max_abs_ang_err, std::abs(s.ang_err));
        }
    }
    for (std::size_t c : cycles) {
        CycleSamples cs;
        cs.cycle = c;
        cs.slaves.resize(n_slaves);
        for (const RunTrace* t : ordered) {
            for (std::size_t i = 0; i < n_slaves; ++i) {
                const ErrorSample& s = t->at(c, i);
                cs.slaves[i].pos_err.push_back(s.pos_err);
                cs.slaves[i].ang_err.push_back(s.ang_err);
            }
        }
        for (auto& ss : cs.slaves) {
            ss.mean_pos = mean_of(ss.pos_err);
            ss.mean_ang = mean_of(ss.ang_err);
        }
        out.cycles.push_back(std::move(cs));
    }
    return out;
}

/// Mean and standard error of a pooled sample.
struct PooledStat {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

inline PooledStat pooled_stat(const std::vector<double>& xs) {
    PooledStat st;
    st.n = xs.size();
    if (st.n == 0) return st;
    st.mean = mean_of(xs);
    if (st.n > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - st.mean) * (x - st.mean);
        st.std_error = std::sqrt(ss / static_cast<double>(st.n - 1) / static_cast<double>(st.n));
    }
    return st;
}

/// |position error| pooled over every selected cycle, run and slave.
inline std::vector<double> selected_abs_pos(const GroupSummary& s) {
    std::vector<double> out;
    for (const auto& c : s.cycles)
        for (const auto& sl : c.slaves)
            for (double x : sl.pos_err) out.push_back(std::abs(x));
    return out;
}

inline std::vector<double> selected_abs_ang(const GroupSummary& s) {
    std::vector<double> out;
    for (const auto& c : s.cycles)
        for (const auto& sl : c.slaves)
            for (double x : sl.ang_err) out.push_back(std::abs(x));
    return out;
}

}  // namespace formsim
