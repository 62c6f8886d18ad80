#include "drl/env.hpp"

#include <cmath>
#include <stdexcept>

#include "drl/errors.hpp"

namespace drl {

namespace {

constexpr double kGravity = 9.8;
constexpr double kCartMass = 1.0;
constexpr double kPoleMass = 0.1;
constexpr double kTotalMass = kCartMass + kPoleMass;
constexpr double kPoleHalfLength = 0.5;
constexpr double kPoleMassLength = kPoleMass * kPoleHalfLength;
constexpr double kForce = 10.0;
constexpr double kTau = 0.02;
constexpr double kXThreshold = 2.4;
constexpr double kThetaThreshold = 12.0 * 2.0 * M_PI / 360.0;

void check_action(long action, std::size_t action_count) {
    if (action < 0 || static_cast<std::size_t>(action) >= action_count)
        throw std::out_of_range("action " + std::to_string(action) + " out of range");
}

}  // namespace

CartPoleLite::CartPoleLite(long episode_limit) : episode_limit_(episode_limit) {
    if (episode_limit < 1) throw std::invalid_argument("episode_limit must be >= 1");
}

std::vector<double> CartPoleLite::reset(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-0.05, 0.05);
    for (double& v : state_) v = dist(rng);
    step_count_ = 0;
    done_ = false;
    return state_;
}

StepResult CartPoleLite::step(long action) {
    if (done_) throw RuntimeFailure("cartpole-lite: step() after done, reset first");
    check_action(action, action_count());

    double x = state_[0], x_dot = state_[1], theta = state_[2], theta_dot = state_[3];
    double force = action == 1 ? kForce : -kForce;
    double cos_t = std::cos(theta);
    double sin_t = std::sin(theta);

    double temp = (force + kPoleMassLength * theta_dot * theta_dot * sin_t) / kTotalMass;
    double theta_acc = (kGravity * sin_t - cos_t * temp) /
                       (kPoleHalfLength * (4.0 / 3.0 - kPoleMass * cos_t * cos_t / kTotalMass));
    double x_acc = temp - kPoleMassLength * theta_acc * cos_t / kTotalMass;

    state_[0] = x + kTau * x_dot;
    state_[1] = x_dot + kTau * x_acc;
    state_[2] = theta + kTau * theta_dot;
    state_[3] = theta_dot + kTau * theta_acc;
    ++step_count_;

    bool failed = std::abs(state_[0]) > kXThreshold || std::abs(state_[2]) > kThetaThreshold;
    done_ = failed || step_count_ >= episode_limit_;
    return {state_, 1.0, done_};
}

LineWorld::LineWorld(long episode_limit) : episode_limit_(episode_limit) {
    if (episode_limit < 1) throw std::invalid_argument("episode_limit must be >= 1");
}

std::vector<double> LineWorld::reset(std::mt19937_64& rng) {
    (void)rng;  // start cell is fixed
    position_ = kCells / 2;
    step_count_ = 0;
    done_ = false;
    return {static_cast<double>(position_) / (kCells - 1)};
}

StepResult LineWorld::step(long action) {
    if (done_) throw RuntimeFailure("line-world: step() after done, reset first");
    check_action(action, action_count());

    position_ += action == 1 ? 1 : -1;
    position_ = std::max(0, std::min(kCells - 1, position_));
    ++step_count_;

    bool at_goal = position_ == kCells - 1;
    done_ = at_goal || step_count_ >= episode_limit_;
    return {{static_cast<double>(position_) / (kCells - 1)}, at_goal ? 1.0 : 0.0, done_};
}

std::unique_ptr<Environment> make_environment(const std::string& name, long episode_limit) {
    if (name == "cartpole-lite")
        return std::make_unique<CartPoleLite>(episode_limit > 0 ? episode_limit : 200);
    if (name == "line-world")
        return std::make_unique<LineWorld>(episode_limit > 0 ? episode_limit : 50);
    throw ConfigError("unknown environment '" + name + "'");
}

}  // namespace drl
