#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace blowup {

using State = std::vector<double>;

struct IvpSystem {
    std::size_t dimension = 0;
    std::function<void(double t, const State& y, State& dydt)> rhs;
};

enum class IvpStatus { completed, stopped_by_event, step_underflow, nonfinite, bound_exceeded, max_steps };

std::string to_string(IvpStatus s);

using EventFunction = std::function<double(double t, const State& y)>;

struct IntegrateOptions {
    double h0 = 0.0;                 // 0 selects the starting step automatically
    double h_max = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 50'000'000;
    double max_abs = std::numeric_limits<double>::infinity(); // stop once any |y_i| exceeds this
    EventFunction stop_event;        // optional terminal event
    int stop_direction = 0;          // +1 rising, -1 falling, 0 either
    double min_event_gap = 1e-6;     // terminal events closer than this to t0 are ignored
};

/// Accepted steps of a Dormand-Prince run plus the free fourth-order dense output.
class Trajectory {
public:
    std::size_t dimension() const { return dim_; }
    const std::vector<double>& times() const { return times_; }
    const std::vector<State>& states() const { return states_; }
    double t_begin() const { return times_.front(); }
    double t_end() const { return times_.back(); }
    const State& back() const { return states_.back(); }

    State operator()(double t) const;

    IvpStatus status = IvpStatus::completed;

private:
    friend class DormandPrince;
    std::size_t dim_ = 0;
    std::vector<double> times_;
    std::vector<State> states_;
    std::vector<double> step_t0_, step_h_;
    std::vector<double> dense_; // 5 * dim coefficients per step
};

Trajectory integrate(const IvpSystem& system, const State& y0, double t0, double t1,
                     double rtol, double atol, const IntegrateOptions& opts = {});

struct Event {
    double t;
    State state;
};

// Sign changes of `event` along the trajectory, refined by bisection on the dense output.
std::vector<Event> detect_events(const Trajectory& traj, const EventFunction& event, int direction = 0);

struct PeriodicOptions {
    double transient = 200.0;
    double rtol = 1e-12;
    double atol = 1e-14;
    double return_tol = 1e-8;
    int max_returns = 400;
    double max_return_time = 500.0;
    double bound = 1e8;
    int direction = +1;
};

struct PeriodicOrbit {
    enum class Status { converged, no_convergence, equilibrium, unbounded };
    Status status = Status::no_convergence;
    double period = 0.0;
    State anchor;
    Trajectory samples;                  // one period starting at the anchor
    std::vector<double> return_distances;
    std::string diagnostic;

    bool converged() const { return status == Status::converged; }
};

std::string to_string(PeriodicOrbit::Status s);

PeriodicOrbit find_periodic(const IvpSystem& system, const State& x0, const EventFunction& section,
                            const PeriodicOptions& opts = {});

} // namespace blowup
