#include "drl/runtime.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <deque>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <json.hpp>

#include "drl/actor.hpp"
#include "drl/env.hpp"
#include "drl/errors.hpp"
#include "drl/queues.hpp"
#include "drl/sum_tree.hpp"

namespace drl {

std::string to_string(TraceEventKind kind) {
    switch (kind) {
        case TraceEventKind::kDcqRecv: return "dcq_recv";
        case TraceEventKind::kLdqRecv: return "ldq_recv";
        case TraceEventKind::kWsqSend: return "wsq_send";
        case TraceEventKind::kRrqUpdateSend: return "rrq_update_send";
        case TraceEventKind::kRrqSampleSend: return "rrq_sample_send";
        case TraceEventKind::kRrqReplyRecv: return "rrq_reply_recv";
        case TraceEventKind::kRrqInsertSend: return "rrq_insert_send";
        case TraceEventKind::kLaqSend: return "laq_send";
    }
    return "?";
}

SimLatencies make_sim_latencies(const AssignmentMatrix& matrix, const LinkTable& links,
                                const WorkloadSpec& workload, const std::string& rm_device,
                                const std::string& learner_device,
                                const std::string& host_device, bool comm_reduction,
                                std::size_t dc_capacity) {
    auto rm_idx = matrix.device_index(rm_device);
    auto learner_idx = matrix.device_index(learner_device);
    if (!rm_idx || !learner_idx)
        throw InfeasibleError("make_sim_latencies: unknown device");
    bool co_resident = rm_device == learner_device;
    const MatrixCell& rm_cell =
        matrix.cell(*rm_idx, co_resident ? Column::kBoth : Column::kRmOnly);
    const MatrixCell& learner_cell =
        matrix.cell(*learner_idx, co_resident ? Column::kBoth : Column::kLearnerOnly);
    if (!rm_cell.feasible || !learner_cell.feasible)
        throw InfeasibleError("make_sim_latencies: infeasible placement");

    if (dc_capacity == 0) dc_capacity = workload.batch_size;
    double bs = static_cast<double>(workload.batch_size);
    double e = static_cast<double>(workload.experience_words);

    SimLatencies s;
    s.sampling_s = rm_cell.latency.sampling_s;
    s.update_s = rm_cell.latency.update_s;
    s.insert_s = rm_cell.latency.insert_s;
    s.learner_s = learner_cell.latency.learner_s;
    s.comm_sample_s =
        route_comm(links, rm_device, learner_device, host_device, bs * e * 8.0, comm_reduction);
    s.comm_update_s =
        route_comm(links, learner_device, rm_device, host_device, bs * 8.0, comm_reduction);
    s.comm_insert_s = route_comm(links, host_device, rm_device, host_device,
                                 static_cast<double>(dc_capacity) * e * 8.0, comm_reduction);
    return s;
}

namespace {

// ---------------------------------------------------------------------------
// Replay worker: owns the replay manager, serves RRQ requests in FIFO order.
// ---------------------------------------------------------------------------
class RmWorker {
public:
    RmWorker(ReplayManager rm, std::uint64_t seed, const SimLatencies* sim,
             BoundedQueue<ReplayRequestMsg>& in, BoundedQueue<ReplayReplyMsg>& out,
             const RuntimeHooks& hooks)
        : rm_(std::move(rm)), rng_(seed), sim_(sim), in_(in), out_(out), hooks_(hooks) {}

    bool step() {
        if (outbox_) {
            if (!out_.try_push(std::move(*outbox_))) return false;
            outbox_.reset();
        }
        auto msg = in_.try_pop();
        if (!msg) return false;

        double start = std::max(busy_until_, msg->stamp);
        ++op_seq_;
        switch (msg->opcode) {
            case ReplayOpcode::kSample: {
                double end = start + (sim_ ? sim_->sampling_s : 0.0);
                busy_until_ = end;
                SampleBatch batch = rm_.sample_batch_experiences(msg->batch_size, rng_);
                if (hooks_.on_sample_done) hooks_.on_sample_done(batch.indices, op_seq_);
                ReplayReplyMsg reply;
                reply.opcode = ReplayOpcode::kSample;
                reply.indices = std::move(batch.indices);
                reply.priorities = std::move(batch.priorities);
                reply.experiences = std::move(batch.experiences);
                reply.stamp = end;
                if (!out_.try_push(std::move(reply))) outbox_ = std::move(reply);
                break;
            }
            case ReplayOpcode::kUpdate: {
                busy_until_ = start + (sim_ ? sim_->update_s : 0.0);
                rm_.update_priorities(msg->indices, msg->priorities);
                if (hooks_.on_update_done) hooks_.on_update_done(msg->indices, op_seq_);
                break;
            }
            case ReplayOpcode::kInsert: {
                busy_until_ = start + (sim_ ? sim_->insert_s : 0.0);
                std::vector<double> priorities = msg->priorities;
                if (priorities.empty())
                    priorities.assign(msg->experiences.size(), rm_.default_insert_priority());
                std::unordered_set<std::size_t> avoid(msg->avoid_indices.begin(),
                                                      msg->avoid_indices.end());
                auto written = rm_.insert(msg->experiences, priorities, avoid);
                if (hooks_.on_storage_write)
                    for (std::size_t k = 0; k < written.size(); ++k)
                        hooks_.on_storage_write(written[k], msg->experiences[k], op_seq_);
                break;
            }
            case ReplayOpcode::kRetrieve: {
                busy_until_ = start + (sim_ ? sim_->update_s : 0.0);
                ReplayReplyMsg reply;
                reply.opcode = ReplayOpcode::kRetrieve;
                reply.indices = msg->indices;
                reply.priorities = rm_.retrieve(msg->indices);
                reply.stamp = busy_until_;
                if (!out_.try_push(std::move(reply))) outbox_ = std::move(reply);
                break;
            }
        }
        return true;
    }

    const ReplayManager& replay() const { return rm_; }

private:
    ReplayManager rm_;
    std::mt19937_64 rng_;
    const SimLatencies* sim_;
    BoundedQueue<ReplayRequestMsg>& in_;
    BoundedQueue<ReplayReplyMsg>& out_;
    RuntimeHooks hooks_;
    std::optional<ReplayReplyMsg> outbox_;
    double busy_until_ = 0.0;
    std::uint64_t op_seq_ = 0;
};

// ---------------------------------------------------------------------------
// Learner worker: one training iteration per LAQ message.
// ---------------------------------------------------------------------------
class LearnerWorker {
public:
    LearnerWorker(const LearnerConfig& config, std::size_t sub_batches, const SimLatencies* sim,
                  BoundedQueue<TrainRequestMsg>& in, BoundedQueue<TrainDoneMsg>& out,
                  const RuntimeHooks& hooks)
        : learner_(config), sub_batches_(sub_batches), sim_(sim), in_(in), out_(out),
          hooks_(hooks) {}

    bool step() {
        if (outbox_) {
            if (!out_.try_push(std::move(*outbox_))) return false;
            outbox_.reset();
        }
        auto msg = in_.try_pop();
        if (!msg) return false;

        double start = std::max(busy_until_, msg->stamp);
        double end = start + (sim_ ? sim_->learner_s : 0.0);
        busy_until_ = end;

        if (hooks_.on_train_consume)
            for (const Experience& exp : msg->experiences) hooks_.on_train_consume(exp);

        TrainBatch batch{std::move(msg->experiences), msg->indices, sub_batches_};
        TrainResult result = learner_.train_iteration(batch);

        TrainDoneMsg done;
        done.indices = std::move(msg->indices);
        done.new_priorities = std::move(result.new_priorities);
        done.weights = std::move(result.new_weights);
        done.weight_version = learner_.iterations();
        done.loss = result.loss;
        done.stamp = end;
        if (!out_.try_push(std::move(done))) outbox_ = std::move(done);
        return true;
    }

    const Learner& learner() const { return learner_; }

private:
    Learner learner_;
    std::size_t sub_batches_;
    const SimLatencies* sim_;
    BoundedQueue<TrainRequestMsg>& in_;
    BoundedQueue<TrainDoneMsg>& out_;
    RuntimeHooks hooks_;
    std::optional<TrainDoneMsg> outbox_;
    double busy_until_ = 0.0;
};

// ---------------------------------------------------------------------------
// Host coordinator: the protocol loop. Collect -> LDQ poll -> RRQ poll, with
// deferred collision-checked insertion. Never blocks; pending sends live in
// outboxes flushed each step.
// ---------------------------------------------------------------------------
class HostCoordinator {
public:
    HostCoordinator(const ToolConfig& config, const SimLatencies* sim,
                    std::vector<BoundedQueue<ExperienceBatch>*> dcqs,
                    std::vector<BoundedQueue<WeightSnapshot>*> wsqs,
                    BoundedQueue<ReplayRequestMsg>& rrq_in,
                    BoundedQueue<ReplayReplyMsg>& rrq_out, BoundedQueue<TrainRequestMsg>& laq,
                    BoundedQueue<TrainDoneMsg>& ldq, const RuntimeHooks& hooks)
        : config_(config), sim_(sim), dcqs_(std::move(dcqs)), wsqs_(std::move(wsqs)),
          rrq_in_(rrq_in), rrq_out_(rrq_out), laq_(laq), ldq_(ldq), hooks_(hooks) {
        dc_capacity_ = config.dc_capacity ? config.dc_capacity : config.batch_size;
    }

    bool step() {
        bool progressed = false;
        progressed |= flush_outboxes();
        progressed |= collect_experiences();
        maybe_bootstrap();
        progressed |= poll_ldq();
        progressed |= poll_rrq();
        progressed |= flush_outboxes();
        return progressed;
    }

    bool finished() const {
        return stopping_ && rrq_outbox_.empty() && laq_outbox_.empty();
    }

    long iterations() const { return iterations_; }
    double virtual_now() const { return now_; }
    bool early_stop() const { return early_stop_; }
    const std::vector<double>& reward_curve() const { return reward_curve_; }
    std::map<std::string, long>& message_counts() { return counts_; }

private:
    void trace(TraceEventKind kind, double stamp) {
        ++counts_[to_string(kind)];
        if (hooks_.on_event) hooks_.on_event({kind, iterations_, stamp});
    }

    bool flush_outboxes() {
        bool progressed = false;
        while (!rrq_outbox_.empty()) {
            if (!rrq_in_.try_push(std::move(rrq_outbox_.front()))) break;
            rrq_outbox_.pop_front();
            progressed = true;
        }
        while (!laq_outbox_.empty()) {
            if (!laq_.try_push(std::move(laq_outbox_.front()))) break;
            laq_outbox_.pop_front();
            progressed = true;
        }
        return progressed;
    }

    bool collect_experiences() {
        bool progressed = false;
        // Move spilled experiences in first, then drain whatever the actors
        // have queued. dc_buffer itself never exceeds its capacity.
        while (dc_buffer_.size() < dc_capacity_ && !spill_.empty()) {
            dc_buffer_.push_back(std::move(spill_.front()));
            spill_.pop_front();
            progressed = true;
        }
        bool drained_any = true;
        while (drained_any && dc_buffer_.size() < dc_capacity_ && spill_.empty()) {
            drained_any = false;
            for (auto* dcq : dcqs_) {
                auto batch = dcq->try_pop();
                if (!batch) continue;
                drained_any = true;
                progressed = true;
                now_ = std::max(now_, batch->stamp);
                trace(TraceEventKind::kDcqRecv, batch->stamp);
                if (batch->episode_reward) record_episode(*batch->episode_reward);
                for (Experience& exp : batch->experiences) {
                    if (dc_buffer_.size() < dc_capacity_)
                        dc_buffer_.push_back(std::move(exp));
                    else
                        spill_.push_back(std::move(exp));
                }
                if (dc_buffer_.size() >= dc_capacity_) break;
            }
        }
        if (dc_buffer_.size() >= dc_capacity_) insertion_flag_ = true;
        return progressed;
    }

    void record_episode(double reward) {
        reward_curve_.push_back(reward);
        ++counts_["episodes"];
        last100_.push_back(reward);
        if (last100_.size() > 100) last100_.pop_front();
        if (config_.reward_threshold && last100_.size() >= 100) {
            double mean = 0.0;
            for (double r : last100_) mean += r;
            mean /= static_cast<double>(last100_.size());
            if (mean >= *config_.reward_threshold && !stopping_) {
                stopping_ = true;
                early_stop_ = true;
            }
        }
    }

    void send_insert(double stamp) {
        ReplayRequestMsg insert;
        insert.opcode = ReplayOpcode::kInsert;
        insert.experiences.assign(std::make_move_iterator(dc_buffer_.begin()),
                                  std::make_move_iterator(dc_buffer_.end()));
        dc_buffer_.clear();
        insert.avoid_indices.assign(in_flight_.begin(), in_flight_.end());
        insert.stamp = stamp + (sim_ ? sim_->comm_insert_s : 0.0);
        rrq_outbox_.push_back(std::move(insert));
        insertion_flag_ = false;
        trace(TraceEventKind::kRrqInsertSend, stamp);
    }

    void send_sample(double stamp) {
        ReplayRequestMsg sample;
        sample.opcode = ReplayOpcode::kSample;
        sample.batch_size = config_.batch_size;
        sample.stamp = stamp;
        rrq_outbox_.push_back(std::move(sample));
        trace(TraceEventKind::kRrqSampleSend, stamp);
    }

    void maybe_bootstrap() {
        if (bootstrapped_ || !insertion_flag_ || stopping_) return;
        // Cold start: no training result yet, so insert directly and issue the
        // first sampling request behind it.
        send_insert(now_);
        send_sample(now_);
        bootstrapped_ = true;
    }

    bool poll_ldq() {
        auto msg = ldq_.try_pop();
        if (!msg) return false;
        now_ = std::max(now_, msg->stamp);
        ++iterations_;
        trace(TraceEventKind::kLdqRecv, msg->stamp);
        in_flight_.clear();  // training done; write-back precedes the next sampling

        if (iterations_ >= config_.max_iterations) stopping_ = true;

        for (auto* wsq : wsqs_) {
            WeightSnapshot snap{msg->weights, msg->weight_version, msg->stamp};
            if (wsq->try_push(std::move(snap))) trace(TraceEventKind::kWsqSend, msg->stamp);
            // A full WSQ just means the actor still holds an unread snapshot;
            // the next iteration's weights supersede this one.
        }

        ReplayRequestMsg update;
        update.opcode = ReplayOpcode::kUpdate;
        update.indices = std::move(msg->indices);
        update.priorities = std::move(msg->new_priorities);
        update.stamp = msg->stamp + (sim_ ? sim_->comm_update_s : 0.0);
        rrq_outbox_.push_back(std::move(update));
        trace(TraceEventKind::kRrqUpdateSend, msg->stamp);

        if (!stopping_) send_sample(msg->stamp);
        return true;
    }

    bool poll_rrq() {
        auto reply = rrq_out_.try_pop();
        if (!reply) return false;
        now_ = std::max(now_, reply->stamp);
        if (reply->opcode != ReplayOpcode::kSample)
            throw RuntimeFailure("protocol violation: unexpected RRQ reply opcode");
        trace(TraceEventKind::kRrqReplyRecv, reply->stamp);

        in_flight_.clear();
        in_flight_.insert(reply->indices.begin(), reply->indices.end());

        if (insertion_flag_) {
            if (in_flight_.size() >= config_.replay_size) {
                // Degenerate tiny buffer: every slot is in training; retry
                // after the next iteration completes.
            } else {
                send_insert(reply->stamp);
            }
        }

        TrainRequestMsg train;
        train.indices = std::move(reply->indices);
        train.experiences = std::move(reply->experiences);
        train.stamp = reply->stamp + (sim_ ? sim_->comm_sample_s : 0.0);
        laq_outbox_.push_back(std::move(train));
        trace(TraceEventKind::kLaqSend, reply->stamp);
        return true;
    }

    const ToolConfig& config_;
    const SimLatencies* sim_;
    std::vector<BoundedQueue<ExperienceBatch>*> dcqs_;
    std::vector<BoundedQueue<WeightSnapshot>*> wsqs_;
    BoundedQueue<ReplayRequestMsg>& rrq_in_;
    BoundedQueue<ReplayReplyMsg>& rrq_out_;
    BoundedQueue<TrainRequestMsg>& laq_;
    BoundedQueue<TrainDoneMsg>& ldq_;
    RuntimeHooks hooks_;

    std::size_t dc_capacity_;
    std::vector<Experience> dc_buffer_;
    std::deque<Experience> spill_;  // overflow of a partially consumed batch
    bool insertion_flag_ = false;
    bool bootstrapped_ = false;
    bool stopping_ = false;
    bool early_stop_ = false;
    long iterations_ = 0;
    double now_ = 0.0;
    std::unordered_set<std::size_t> in_flight_;
    std::deque<ReplayRequestMsg> rrq_outbox_;
    std::deque<TrainRequestMsg> laq_outbox_;
    std::vector<double> reward_curve_;
    std::deque<double> last100_;
    std::map<std::string, long> counts_;
};

}  // namespace

TrainingRuntime::TrainingRuntime(ToolConfig config, std::optional<SimLatencies> sim,
                                 RuntimeHooks hooks)
    : config_(std::move(config)), sim_(sim), hooks_(std::move(hooks)) {}

TrainingReport TrainingRuntime::run() {
    if (used_) throw RuntimeFailure("TrainingRuntime::run() is single-shot");
    used_ = true;

    bool simulated = config_.mode == RunMode::kSimulated;
    const SimLatencies* sim = simulated && sim_ ? &*sim_ : nullptr;
    if (simulated && !sim_) sim = &(sim_.emplace());  // all-zero charges

    std::size_t qcap = config_.queue_capacity;
    std::vector<std::unique_ptr<BoundedQueue<ExperienceBatch>>> dcqs;
    std::vector<std::unique_ptr<BoundedQueue<WeightSnapshot>>> wsqs;
    for (int a = 0; a < config_.num_actors; ++a) {
        dcqs.push_back(std::make_unique<BoundedQueue<ExperienceBatch>>(qcap));
        wsqs.push_back(std::make_unique<BoundedQueue<WeightSnapshot>>(qcap));
    }
    BoundedQueue<ReplayRequestMsg> rrq_in(qcap);
    BoundedQueue<ReplayReplyMsg> rrq_out(qcap);
    BoundedQueue<TrainRequestMsg> laq(qcap);
    BoundedQueue<TrainDoneMsg> ldq(qcap);

    LearnerConfig learner_config;
    learner_config.layer_dims = config_.layer_dims;
    learner_config.learning_rate = config_.learning_rate;
    learner_config.gamma = config_.gamma;
    learner_config.sub_batches = config_.sub_batches;
    learner_config.sync_period = config_.sync_period;
    learner_config.seed = config_.seed;

    LearnerWorker learner(learner_config, config_.sub_batches, sim, laq, ldq, hooks_);
    RmWorker replay(ReplayManager(config_.replay_size, config_.fanout, config_.replay_mode),
                    config_.seed ^ 0x9e3779b97f4a7c15ULL, sim, rrq_in, rrq_out, hooks_);

    ActorConfig actor_config;
    actor_config.num_actors = config_.num_actors;
    actor_config.epsilon = config_.epsilon;
    actor_config.batch_per_episode = config_.batch_per_episode;

    std::vector<std::unique_ptr<ActorWorker>> actors;
    for (int a = 0; a < config_.num_actors; ++a) {
        auto env = make_environment(config_.env_name, config_.episode_limit);
        auto worker = std::make_unique<ActorWorker>(
            a, std::move(env), learner.learner().policy(), actor_config,
            config_.seed + 7919ULL * (a + 1), *wsqs[a], *dcqs[a]);
        if (hooks_.on_actor_emit) {
            int id = a;
            auto emit = hooks_.on_actor_emit;
            worker->on_emit = [id, emit](const Experience& exp) { emit(id, exp); };
        }
        actors.push_back(std::move(worker));
    }

    std::vector<BoundedQueue<ExperienceBatch>*> dcq_ptrs;
    std::vector<BoundedQueue<WeightSnapshot>*> wsq_ptrs;
    for (auto& q : dcqs) dcq_ptrs.push_back(q.get());
    for (auto& q : wsqs) wsq_ptrs.push_back(q.get());

    HostCoordinator host(config_, sim, dcq_ptrs, wsq_ptrs, rrq_in, rrq_out, laq, ldq, hooks_);

    auto wall_start = std::chrono::steady_clock::now();
    bool use_threads = config_.use_threads && !simulated;

    if (use_threads) {
        std::atomic<bool> stop{false};
        auto spin = [&stop](auto&& stepper) {
            while (!stop.load(std::memory_order_relaxed)) {
                if (!stepper()) std::this_thread::sleep_for(std::chrono::microseconds(50));
            }
        };
        std::vector<std::thread> threads;
        threads.emplace_back(spin, [&] { return replay.step(); });
        threads.emplace_back(spin, [&] { return learner.step(); });
        for (auto& actor : actors)
            threads.emplace_back(spin, [&a = *actor] { return a.step(); });

        long idle = 0;
        while (!host.finished()) {
            if (host.step()) {
                idle = 0;
            } else {
                ++idle;
                if (config_.watchdog_polls > 0 && idle > config_.watchdog_polls) {
                    stop.store(true);
                    for (auto& t : threads) t.join();
                    throw RuntimeFailure(
                        "deadlock watchdog: no host progress after " +
                        std::to_string(idle) + " polls at iteration " +
                        std::to_string(host.iterations()));
                }
                std::this_thread::sleep_for(std::chrono::microseconds(50));
            }
        }
        stop.store(true);
        for (auto& actor : actors) actor->request_stop();
        for (auto& q : dcqs) q->close();
        for (auto& q : wsqs) q->close();
        rrq_in.close();
        rrq_out.close();
        laq.close();
        ldq.close();
        for (auto& t : threads) t.join();
    } else {
        // Cooperative single-threaded scheduler: deterministic round-robin.
        long idle_rounds = 0;
        while (!host.finished()) {
            bool progressed = host.step();
            progressed |= replay.step();
            progressed |= learner.step();
            for (auto& actor : actors) progressed |= actor->step(host.virtual_now());
            if (progressed) {
                idle_rounds = 0;
            } else {
                ++idle_rounds;
                if (config_.watchdog_polls > 0 && idle_rounds > config_.watchdog_polls) {
                    std::ostringstream diag;
                    diag << "deadlock watchdog: no queue activity for " << idle_rounds
                         << " scheduler polls at iteration " << host.iterations()
                         << " (rrq_in=" << rrq_in.size() << " rrq_out=" << rrq_out.size()
                         << " laq=" << laq.size() << " ldq=" << ldq.size() << ")";
                    throw RuntimeFailure(diag.str());
                }
            }
        }
        for (auto& actor : actors) actor->request_stop();
    }

    auto wall_end = std::chrono::steady_clock::now();
    double wall_s = std::chrono::duration<double>(wall_end - wall_start).count();

    TrainingReport report;
    report.iterations = host.iterations();
    report.mode = simulated ? "simulated" : "real";
    report.virtual_or_wall_time_s = simulated ? host.virtual_now() : wall_s;
    double trained = static_cast<double>(host.iterations()) *
                     static_cast<double>(config_.batch_size);
    report.eps = report.virtual_or_wall_time_s > 0.0
                     ? trained / report.virtual_or_wall_time_s
                     : 0.0;
    report.reward_curve = host.reward_curve();
    report.message_counts = host.message_counts();
    report.early_stop = host.early_stop();
    const auto& curve = report.reward_curve;
    std::size_t tail = std::min<std::size_t>(curve.size(), 100);
    if (tail > 0) {
        double mean = 0.0;
        for (std::size_t i = curve.size() - tail; i < curve.size(); ++i) mean += curve[i];
        report.final_mean_reward_100 = mean / static_cast<double>(tail);
    }
    return report;
}

std::string TrainingReport::to_json() const {
    nlohmann::ordered_json j;
    j["iterations"] = iterations;
    j["virtual_or_wall_time_s"] = virtual_or_wall_time_s;
    j["eps"] = eps;
    j["reward_curve"] = reward_curve;
    j["message_counts"] = message_counts;
    j["early_stop"] = early_stop;
    j["mode"] = mode;
    j["final_mean_reward_100"] = final_mean_reward_100;
    return j.dump(2) + "\n";
}

TrainingReport TrainingReport::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("report JSON parse error: ") + e.what());
    }
    TrainingReport r;
    r.iterations = j.at("iterations").get<long>();
    r.virtual_or_wall_time_s = j.at("virtual_or_wall_time_s").get<double>();
    r.eps = j.at("eps").get<double>();
    r.reward_curve = j.at("reward_curve").get<std::vector<double>>();
    r.message_counts = j.at("message_counts").get<std::map<std::string, long>>();
    r.early_stop = j.at("early_stop").get<bool>();
    r.mode = j.at("mode").get<std::string>();
    r.final_mean_reward_100 = j.at("final_mean_reward_100").get<double>();
    return r;
}

TrainingReport run_training(const ToolConfig& config, const Composition& composition,
                            const std::vector<DeviceSpec>& devices, const LinkTable& links,
                            RuntimeHooks hooks) {
    std::optional<SimLatencies> sim;
    if (config.mode == RunMode::kSimulated) {
        WorkloadSpec workload = make_workload(config);
        AssignmentMatrix matrix = build_assignment_matrix(devices, links, workload);
        std::string host;
        for (const DeviceSpec& d : devices)
            if (d.kind == DeviceKind::kCpu) {
                host = d.name;
                break;
            }
        if (host.empty()) throw ConfigError("run_training: no cpu-kind device");
        sim = make_sim_latencies(matrix, links, workload, composition.rm_device,
                                 composition.learner_device, host, config.comm_reduction,
                                 config.dc_capacity);
    }
    TrainingRuntime runtime(config, sim, std::move(hooks));
    return runtime.run();
}

}  // namespace drl
