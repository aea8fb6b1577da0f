#include "lattice_sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "errors.hpp"
#include "kernel.hpp"
#include "textio.hpp"

namespace latwave {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Crude Lipschitz bound for f on [0,K]^2, used only to pick a stable dt.
double lipschitz_bound(const ReactionModel& m) {
    const int n = 64;
    double worst = 0.0;
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
            double u = m.K * i / n;
            double v = m.K * j / n;
            worst = std::max(worst, std::abs(m.f_u(u, v)) + std::abs(m.f_v(u, v)));
        }
    }
    return worst;
}

// Rightmost downward half-height crossing, NaN when the state has none.
double front_crossing(const std::vector<double>& u, double K) {
    double half = 0.5 * K;
    double pos = kNan;
    for (size_t i = 0; i + 1 < u.size(); ++i) {
        if (u[i] >= half && u[i + 1] < half)
            pos = static_cast<double>(i) + (u[i] - half) / (u[i] - u[i + 1]);
    }
    return pos;
}

} // namespace

std::vector<double> step_initial_data(const ReactionModel& m, long sites, long x0) {
    if (sites < 32) throw ValidationError("lattice needs at least 32 sites");
    if (x0 < 0) x0 = sites / 4;
    if (x0 < 1 || x0 >= sites)
        throw ValidationError("step position lies outside the lattice");
    std::vector<double> u(static_cast<size_t>(sites), 0.0);
    for (long i = 0; i < x0; ++i) u[static_cast<size_t>(i)] = m.K;
    return u;
}

std::vector<double> profile_initial_data(const GridFunction& phi, long sites, long x0) {
    if (sites < 32) throw ValidationError("lattice needs at least 32 sites");
    if (x0 < 0) x0 = sites / 4;
    if (x0 < 1 || x0 >= sites)
        throw ValidationError("profile centre lies outside the lattice");
    // The profile rises left to right; the lattice front decays to the right,
    // so the samples are mirrored about the centring site.
    std::vector<double> u(static_cast<size_t>(sites));
    for (long i = 0; i < sites; ++i)
        u[static_cast<size_t>(i)] = phi.eval(static_cast<double>(x0 - i));
    return u;
}

SimResult simulate_lattice(const ReactionModel& m, const std::vector<double>& u0,
                           const SimOptions& opt) {
    if (!(m.K > 0.0)) throw ValidationError("model is not finalized");
    const long N = static_cast<long>(u0.size());
    if (N < 32) throw ValidationError("lattice needs at least 32 sites");
    if (!(opt.horizon > 0.0)) throw ValidationError("horizon must be positive");
    if (!(opt.record_dt > 0.0)) throw ValidationError("record_dt must be positive");

    const double K = m.K;
    for (double v : u0)
        if (!std::isfinite(v) || v < -1e-9 * K || v > K * (1.0 + 1e-9))
            throw ValidationError("initial data must lie inside [0, K]");
    KernelWeights kw = kernel_weights(m.kernel, 1.0, 1e-8);
    const long R = kw.reach;

    double dt_raw = opt.dt > 0.0
                        ? opt.dt
                        : std::min(0.01, 0.2 / (4.0 * m.d + lipschitz_bound(m)));
    long per_record = std::max(1L, static_cast<long>(std::ceil(opt.record_dt / dt_raw - 1e-12)));
    const double dt = opt.record_dt / static_cast<double>(per_record);
    const double tau = m.tau;
    if (tau > 0.0 && tau < dt)
        throw ValidationError("positive delay must be at least one time step; shrink dt");
    long records = static_cast<long>(std::floor(opt.horizon / opt.record_dt + 1e-9));
    if (records < 1) throw ValidationError("horizon is shorter than one record interval");
    const long total_steps = records * per_record;
    const long guard = R + 10;

    const double gl = u0.front();
    const double gr = u0.back();
    const auto& f = m.f;

    auto site = [&](const std::vector<double>& v, long i) -> double {
        if (i < 0) return gl;
        if (i >= N) return gr;
        return v[static_cast<size_t>(i)];
    };
    auto rhs = [&](const std::vector<double>& u, const std::vector<double>& del,
                   std::vector<double>& out) {
        for (long i = 0; i < N; ++i) {
            double conv;
            if (R == 0) {
                conv = del[static_cast<size_t>(i)];
            } else {
                conv = 0.0;
                for (long j = -R; j <= R; ++j)
                    conv += kw.w[static_cast<size_t>(j + R)] * site(del, i - j);
            }
            double lap = site(u, i + 1) - 2.0 * u[static_cast<size_t>(i)] + site(u, i - 1);
            out[static_cast<size_t>(i)] = m.d * lap + f(u[static_cast<size_t>(i)], conv);
        }
    };

    // History ring for the delayed argument, linear in time between steps;
    // before t = 0 the state is held constant at the initial data.
    const long depth = tau > 0.0 ? static_cast<long>(std::ceil(tau / dt)) + 2 : 1;
    std::vector<std::vector<double>> ring(static_cast<size_t>(depth));
    ring[0] = u0;
    long newest = 0;
    auto read_hist = [&](double s, std::vector<double>& out) {
        if (s <= 0.0) {
            out = u0;
            return;
        }
        double si = s / dt;
        long k = static_cast<long>(std::floor(si + 1e-9));
        if (k >= newest) {
            out = ring[static_cast<size_t>(newest % depth)];
            return;
        }
        double th = si - static_cast<double>(k);
        const auto& a = ring[static_cast<size_t>(k % depth)];
        const auto& b = ring[static_cast<size_t>((k + 1) % depth)];
        for (long i = 0; i < N; ++i)
            out[static_cast<size_t>(i)] =
                a[static_cast<size_t>(i)] +
                th * (b[static_cast<size_t>(i)] - a[static_cast<size_t>(i)]);
    };

    std::vector<double> u = u0;
    std::vector<double> k1(u.size()), k2(u.size()), k3(u.size()), k4(u.size());
    std::vector<double> us(u.size());
    std::vector<double> d0(u.size()), dh(u.size()), d1(u.size());

    FrontTrack track;
    track.t.push_back(0.0);
    track.x.push_back(front_crossing(u, K));

    const double lo_band = -1e-6 * K;
    const double hi_band = (1.0 + 1e-6) * K;
    for (long step = 0; step < total_steps; ++step) {
        double t = static_cast<double>(step) * dt;
        if (tau > 0.0) {
            read_hist(t - tau, d0);
            read_hist(t + 0.5 * dt - tau, dh);
            read_hist(t + dt - tau, d1);
        }
        rhs(u, tau > 0.0 ? d0 : u, k1);
        for (long i = 0; i < N; ++i)
            us[static_cast<size_t>(i)] = u[static_cast<size_t>(i)] + 0.5 * dt * k1[static_cast<size_t>(i)];
        rhs(us, tau > 0.0 ? dh : us, k2);
        for (long i = 0; i < N; ++i)
            us[static_cast<size_t>(i)] = u[static_cast<size_t>(i)] + 0.5 * dt * k2[static_cast<size_t>(i)];
        rhs(us, tau > 0.0 ? dh : us, k3);
        for (long i = 0; i < N; ++i)
            us[static_cast<size_t>(i)] = u[static_cast<size_t>(i)] + dt * k3[static_cast<size_t>(i)];
        rhs(us, tau > 0.0 ? d1 : us, k4);
        for (long i = 0; i < N; ++i) {
            size_t s = static_cast<size_t>(i);
            u[s] += dt / 6.0 * (k1[s] + 2.0 * k2[s] + 2.0 * k3[s] + k4[s]);
        }

        for (long i = 0; i < N; ++i) {
            double& v = u[static_cast<size_t>(i)];
            if (v < lo_band || v > hi_band)
                throw StabilityError("state left the invariant region at t = "
                                     + fmt_g(t + dt, 6) + ", site " + std::to_string(i));
            v = std::clamp(v, 0.0, K);
        }

        ++newest;
        ring[static_cast<size_t>(newest % depth)] = u;

        if ((step + 1) % per_record == 0) {
            double tr = static_cast<double>((step + 1) / per_record) * opt.record_dt;
            double x = front_crossing(u, K);
            if (std::isfinite(x) &&
                (x < static_cast<double>(guard) || x > static_cast<double>(N - 1 - guard)))
                throw BoundaryError("front entered the boundary guard band at t = "
                                    + fmt_g(tr, 6) + "; enlarge the lattice or shorten the run");
            track.t.push_back(tr);
            track.x.push_back(x);
        }
    }

    // Front speed from the second half of the records.
    double t_end = static_cast<double>(records) * opt.record_dt;
    std::vector<double> ts, xs;
    for (size_t i = 0; i < track.t.size(); ++i) {
        if (track.t[i] >= 0.5 * t_end && std::isfinite(track.x[i])) {
            ts.push_back(track.t[i]);
            xs.push_back(track.x[i]);
        }
    }
    if (ts.size() < 3) {
        track.speed = kNan;
        track.speed_valid = false;
        track.diagnostic = track.x.empty() || !std::isfinite(track.x.front())
                               ? "state has no half-height front to follow"
                               : "too few usable front samples in the measurement window";
    } else {
        double n = static_cast<double>(ts.size());
        double mt = 0.0, mx = 0.0;
        for (size_t i = 0; i < ts.size(); ++i) {
            mt += ts[i];
            mx += xs[i];
        }
        mt /= n;
        mx /= n;
        double stt = 0.0, stx = 0.0, sxx2 = 0.0;
        for (size_t i = 0; i < ts.size(); ++i) {
            stt += (ts[i] - mt) * (ts[i] - mt);
            stx += (ts[i] - mt) * (xs[i] - mx);
            sxx2 += (xs[i] - mx) * (xs[i] - mx);
        }
        track.speed = stx / stt;
        track.speed_r2 = sxx2 > 0.0 ? std::max(0.0, 1.0 - (sxx2 - stx * stx / stt) / sxx2) : 0.0;
        track.speed_valid = true;
    }

    SimResult res;
    res.u = std::move(u);
    res.track = std::move(track);
    res.dt = dt;
    res.steps = total_steps;
    return res;
}

void write_front_csv(const FrontTrack& track, std::ostream& os) {
    os << "t,x_front\n";
    for (size_t i = 0; i < track.t.size(); ++i)
        os << fmt12(track.t[i]) << "," << fmt12(track.x[i]) << "\n";
}

void write_front_csv(const FrontTrack& track, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    write_front_csv(track, os);
}

} // namespace latwave
