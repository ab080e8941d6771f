#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <numbers>
#include <regex>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "kincal/config.hpp"
#include "kincal/dh.hpp"
#include "kincal/ekf.hpp"
#include "kincal/metrics.hpp"
#include "kincal/noise.hpp"
#include "kincal/occlusion.hpp"
#include "kincal/selection.hpp"
#include "kincal/simworld.hpp"

namespace kincal {

inline constexpr const char* kVersion = "0.1.0";

// Everything one experiment suite needs: the world definition, the module
// tunables and the run protocol. Mirrors the config file sections.
struct ExperimentConfig {
    // [world]
    DhTable true_table;
    JointConfig limits;  // angles initialized to lower; carries lower/upper
    MarkerSpec palm_marker;
    MarkerSpec back_marker;
    CameraModel camera;
    VisibilityRule visibility;
    // [noise]
    NoiseParams noise;
    // [estimator]
    double q_diag = 1e-10;
    double init_width_linear_mm = 46.0;
    double init_width_angular_deg = 54.0;
    // [occlusion]
    double occlusion_prior_a0 = 1.0;
    double occlusion_prior_b0 = 1.0;
    double occlusion_length_scale = 0.15;
    // [selection]
    CostParams cost;
    int optimizer_budget = 200;
    double optimizer_epsilon = 1e-4;
    // [experiment]
    std::vector<Method> methods{Method::random, Method::al, Method::ucsal, Method::ccsal};
    int iterations = 50;
    int repetitions = 50;
    int eval_set_size = 1000;
    NoiseMode noise_mode = NoiseMode::pose_dependent;
    std::uint64_t master_seed = 1;
    int threads = 0;  // 0: hardware concurrency
    std::string out_dir = "out";

    void validate() const {
        if (true_table.joint_count() == 0)
            throw std::invalid_argument("config: world has no joints");
        if (limits.size() != true_table.joint_count())
            throw std::invalid_argument("config: joint limits do not match the table");
        for (int j = 0; j < limits.size(); ++j) {
            if (!(limits.lower[j] < limits.upper[j]))
                throw std::invalid_argument("config: joint limits must satisfy lower < upper");
        }
        if (std::abs(camera.optical_axis.norm() - 1.0) > 1e-9)
            throw std::invalid_argument("config: camera axis must have unit norm");
        if (!(camera.fov_half_angle_deg > 0.0) || !(camera.fov_half_angle_deg < 90.0))
            throw std::invalid_argument("config: camera fov half-angle must be in (0, 90)");
        if (!(visibility.max_view_angle_deg > 0.0) || visibility.max_view_angle_deg > 90.0)
            throw std::invalid_argument("config: max view angle must be in (0, 90]");
        if (noise.noise_a < 0.0 || noise.noise_b < 0.0 || noise.constant_sigma2 < 0.0)
            throw std::invalid_argument("config: noise coefficients must be nonnegative");
        if (q_diag < 0.0 || init_width_linear_mm < 0.0 || init_width_angular_deg < 0.0)
            throw std::invalid_argument("config: estimator parameters must be nonnegative");
        if (!(occlusion_prior_a0 > 0.0) || !(occlusion_prior_b0 > 0.0) ||
            !(occlusion_length_scale > 0.0))
            throw std::invalid_argument("config: occlusion priors and length scale must be positive");
        cost.validate();
        if (optimizer_budget < 1 || optimizer_epsilon < 0.0)
            throw std::invalid_argument("config: optimizer budget/epsilon invalid");
        if (methods.empty())
            throw std::invalid_argument("config: no selection methods listed");
        if (iterations < 1 || repetitions < 1 || eval_set_size < 1 || threads < 0)
            throw std::invalid_argument("config: iterations, repetitions and eval_set_size must be >= 1");
    }
};

// One iteration of one run.
struct IterationRow {
    int iteration = 0;  // 1-based
    Eigen::VectorXd theta;
    double cost = 0.0;
    double step_l1_deg = 0.0;
    bool detected = false;
    double pos_err_mm = 0.0;
    double rot_err_deg = 0.0;
    double cum_move_deg = 0.0;
    int discarded_so_far = 0;
    Eigen::VectorXd x_hat;
    Eigen::VectorXd p_diag;
};

struct RunRecord {
    Method method = Method::al;
    int run_id = 0;
    std::uint64_t init_seed = 0;
    std::uint64_t obs_seed = 0;
    std::vector<IterationRow> rows;
    OcclusionMemory final_memory;
};

namespace seeds {

// Initial table perturbation and initial configuration: identical across
// methods and noise modes so every method starts from the same conditions.
inline std::uint64_t init(std::uint64_t master, int rep) {
    return derive_seed(master, "init", static_cast<std::uint64_t>(rep));
}

// Observation noise stream: per method, shared between PDN and CN so the
// ablation sees matched noise.
inline std::uint64_t obs(std::uint64_t master, Method m, int rep) {
    return derive_seed(master, "obs/" + method_name(m), static_cast<std::uint64_t>(rep));
}

inline std::uint64_t selection(std::uint64_t master, Method m, int rep) {
    return derive_seed(master, "sel/" + method_name(m), static_cast<std::uint64_t>(rep));
}

// Evaluation set of one iteration: independent of method and mode so all
// methods are scored on the same configurations.
inline std::uint64_t eval(std::uint64_t master, int rep, int iteration) {
    return derive_seed(derive_seed(master, "eval", static_cast<std::uint64_t>(rep)), "iter",
                       static_cast<std::uint64_t>(iteration));
}

}  // namespace seeds

// One calibration run: draw the initial estimate and configuration, then loop
// select -> move -> sample; detections feed the EKF, failed attempts only feed
// the occlusion memory and still consume their iteration.
inline RunRecord run_single(const ExperimentConfig& cfg, Method method, int rep) {
    cfg.validate();

    RunRecord rec;
    rec.method = method;
    rec.run_id = rep;
    rec.init_seed = seeds::init(cfg.master_seed, rep);
    rec.obs_seed = seeds::obs(cfg.master_seed, method, rep);

    const int n = cfg.true_table.joint_count();
    const double width_linear_m = cfg.init_width_linear_mm / 1000.0;
    const double width_angular_rad = cfg.init_width_angular_deg * std::numbers::pi / 180.0;

    Rng init_rng(rec.init_seed);
    const DhTable initial_estimate =
        perturb_initial_estimate(cfg.true_table, init_rng, width_linear_m, width_angular_rad);
    JointConfig theta_prev = uniform_config(cfg.limits, init_rng);

    EkfState ekf;
    ekf.x_hat = initial_estimate.params();
    ekf.P = initial_covariance(n, width_linear_m, width_angular_rad);
    ekf.Q = cfg.q_diag * Eigen::MatrixXd::Identity(4 * n, 4 * n);

    GroundTruth world;
    world.true_table = cfg.true_table;
    world.palm_marker = cfg.palm_marker;
    world.back_marker = cfg.back_marker;
    world.camera = cfg.camera;
    world.noise = cfg.noise;
    world.visibility = cfg.visibility;
    world.seed = rec.obs_seed;
    world.reseed();

    Rng sel_rng(seeds::selection(cfg.master_seed, method, rep));
    OcclusionMemory memory{{}, cfg.occlusion_prior_a0, cfg.occlusion_prior_b0,
                           cfg.occlusion_length_scale};
    const SelectionMethod sel{method, cfg.cost};
    const DirectConfig direct_cfg{cfg.optimizer_budget, cfg.optimizer_epsilon};
    const DhTable& prototype = cfg.true_table;  // structure only; values come from x_hat

    double cum_move_deg = 0.0;
    int discarded = 0;
    rec.rows.reserve(cfg.iterations);
    for (int it = 1; it <= cfg.iterations; ++it) {
        const SelectionResult chosen =
            select_next(sel, theta_prev, ekf, prototype, cfg.noise, cfg.noise_mode, cfg.camera,
                        memory, direct_cfg, sel_rng);

        const double step_deg =
            (chosen.theta.angles - theta_prev.angles).lpNorm<1>() * 180.0 / std::numbers::pi;
        cum_move_deg += step_deg;

        const auto obs = sample_observation(world, chosen.theta, cfg.noise_mode);
        if (obs) {
            memory = record_attempt(std::move(memory), chosen.theta.normalized(), true);
            ekf = predict(std::move(ekf));
            UpdateResult up = update(ekf, *obs, prototype);
            if (up.ok)
                ekf = std::move(up.state);
        } else {
            memory = record_attempt(std::move(memory), chosen.theta.normalized(), false);
            ++discarded;
        }

        const DhTable est = prototype.with_params(ekf.x_hat);
        const EvalSet evals =
            EvalSet::uniform(cfg.limits, cfg.eval_set_size, seeds::eval(cfg.master_seed, rep, it));

        IterationRow row;
        row.iteration = it;
        row.theta = chosen.theta.angles;
        row.cost = chosen.objective;
        row.step_l1_deg = step_deg;
        row.detected = obs.has_value();
        row.pos_err_mm = avg_position_error_mm(est, cfg.true_table, evals);
        row.rot_err_deg = avg_orientation_error_deg(est, cfg.true_table, evals);
        row.cum_move_deg = cum_move_deg;
        row.discarded_so_far = discarded;
        row.x_hat = ekf.x_hat;
        row.p_diag = ekf.P.diagonal();
        rec.rows.push_back(std::move(row));

        theta_prev = chosen.theta;
    }
    rec.final_memory = std::move(memory);
    return rec;
}

struct SuiteResult {
    ExperimentConfig config;
    std::vector<std::vector<RunRecord>> runs;  // [method order][repetition]
};

// Runs repetitions x methods, concurrently when threads allow. Output ordering
// is fixed by (method, repetition), independent of scheduling.
inline SuiteResult run_suite(const ExperimentConfig& cfg,
                             std::function<void(const RunRecord&)> on_run_done = {}) {
    cfg.validate();
    SuiteResult result;
    result.config = cfg;
    result.runs.assign(cfg.methods.size(), std::vector<RunRecord>(cfg.repetitions));

    struct Task {
        std::size_t method_index;
        int rep;
    };
    std::vector<Task> tasks;
    for (std::size_t m = 0; m < cfg.methods.size(); ++m)
        for (int r = 0; r < cfg.repetitions; ++r)
            tasks.push_back(Task{m, r});

    unsigned thread_count = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                            : std::max(1u, std::thread::hardware_concurrency());
    thread_count = std::min<unsigned>(thread_count, static_cast<unsigned>(tasks.size()));

    std::atomic<std::size_t> next{0};
    std::mutex done_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size())
                return;
            const Task& t = tasks[i];
            RunRecord rec = run_single(cfg, cfg.methods[t.method_index], t.rep);
            if (on_run_done) {
                std::lock_guard<std::mutex> lock(done_mutex);
                on_run_done(rec);
            }
            result.runs[t.method_index][t.rep] = std::move(rec);
        }
    };

    if (thread_count <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < thread_count; ++i)
            pool.emplace_back(worker);
        for (std::thread& th : pool)
            th.join();
    }
    return result;
}

struct IterationAggregate {
    int iteration = 0;
    MeanStd pos_err_mm;
    MeanStd rot_err_deg;
    MeanStd cum_move_deg;
    double discarded_mean = 0.0;
};

inline std::vector<IterationAggregate> aggregate_iterations(const std::vector<RunRecord>& runs) {
    std::vector<IterationAggregate> out;
    if (runs.empty())
        return out;
    const std::size_t iters = runs.front().rows.size();
    out.reserve(iters);
    for (std::size_t k = 0; k < iters; ++k) {
        std::vector<double> pos, rot, move;
        double disc = 0.0;
        for (const RunRecord& run : runs) {
            pos.push_back(run.rows[k].pos_err_mm);
            rot.push_back(run.rows[k].rot_err_deg);
            move.push_back(run.rows[k].cum_move_deg);
            disc += run.rows[k].discarded_so_far;
        }
        IterationAggregate agg;
        agg.iteration = static_cast<int>(k) + 1;
        agg.pos_err_mm = mean_std(pos);
        agg.rot_err_deg = mean_std(rot);
        agg.cum_move_deg = mean_std(move);
        agg.discarded_mean = disc / static_cast<double>(runs.size());
        out.push_back(agg);
    }
    return out;
}

struct MethodSummary {
    Method method = Method::al;
    MeanStd final_pos_err_mm;
    MeanStd final_rot_err_deg;
    MeanStd final_cum_move_deg;
    MeanStd discarded;
};

inline MethodSummary summarize_method(Method method, const std::vector<RunRecord>& runs) {
    MethodSummary s;
    s.method = method;
    std::vector<double> pos, rot, move, disc;
    for (const RunRecord& run : runs) {
        if (run.rows.empty())
            continue;
        pos.push_back(run.rows.back().pos_err_mm);
        rot.push_back(run.rows.back().rot_err_deg);
        move.push_back(run.rows.back().cum_move_deg);
        disc.push_back(static_cast<double>(run.rows.back().discarded_so_far));
    }
    s.final_pos_err_mm = mean_std(pos);
    s.final_rot_err_deg = mean_std(rot);
    s.final_cum_move_deg = mean_std(move);
    s.discarded = mean_std(disc);
    return s;
}

namespace detail {

inline std::string csv_int(long long v) { return std::to_string(v); }

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write output file '" + path.string() + "'");
    out << content;
    if (!out)
        throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace detail

ConfigDoc experiment_to_config(const ExperimentConfig& cfg);

// Writes the per-run and per-iteration CSVs for every method, the suite
// summary, and the reproduction manifest. Rerunning the suite from the
// manifest reproduces every CSV byte for byte.
inline void emit_outputs(const SuiteResult& suite, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const ExperimentConfig& cfg = suite.config;
    const int n = cfg.true_table.joint_count();
    const int p = cfg.true_table.param_count();

    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        const std::string name = method_name(cfg.methods[m]);
        const std::vector<RunRecord>& runs = suite.runs[m];

        std::string rows = "run_id,method,iteration,pos_err_mm,rot_err_deg,cum_move_deg,"
                           "discarded_so_far,cost,step_l1_deg,detected";
        for (int j = 0; j < n; ++j)
            rows += ",theta_" + std::to_string(j);
        rows += '\n';
        for (const RunRecord& run : runs) {
            for (const IterationRow& r : run.rows) {
                rows += detail::csv_int(run.run_id) + ',' + name + ',' +
                        detail::csv_int(r.iteration) + ',' + format_double(r.pos_err_mm) + ',' +
                        format_double(r.rot_err_deg) + ',' + format_double(r.cum_move_deg) + ',' +
                        detail::csv_int(r.discarded_so_far) + ',' + format_double(r.cost) + ',' +
                        format_double(r.step_l1_deg) + ',' + (r.detected ? "1" : "0");
                for (int j = 0; j < n; ++j)
                    rows += ',' + format_double(r.theta[j]);
                rows += '\n';
            }
        }
        detail::write_file(fs::path(out_dir) / ("runs_" + name + ".csv"), rows);

        std::string iters = "iteration,pos_err_mm_mean,pos_err_mm_std,rot_err_deg_mean,"
                            "rot_err_deg_std,cum_move_deg_mean,cum_move_deg_std,discarded_mean\n";
        for (const IterationAggregate& a : aggregate_iterations(runs)) {
            iters += detail::csv_int(a.iteration) + ',' + format_double(a.pos_err_mm.mean) + ',' +
                     format_double(a.pos_err_mm.stddev) + ',' + format_double(a.rot_err_deg.mean) +
                     ',' + format_double(a.rot_err_deg.stddev) + ',' +
                     format_double(a.cum_move_deg.mean) + ',' +
                     format_double(a.cum_move_deg.stddev) + ',' +
                     format_double(a.discarded_mean) + '\n';
        }
        detail::write_file(fs::path(out_dir) / ("iters_" + name + ".csv"), iters);

        std::string states = "run_id,iteration";
        for (int j = 0; j < p; ++j)
            states += ",x_hat_" + std::to_string(j);
        for (int j = 0; j < p; ++j)
            states += ",p_var_" + std::to_string(j);
        states += '\n';
        for (const RunRecord& run : runs) {
            for (const IterationRow& r : run.rows) {
                states += detail::csv_int(run.run_id) + ',' + detail::csv_int(r.iteration);
                for (int j = 0; j < p; ++j)
                    states += ',' + format_double(r.x_hat[j]);
                for (int j = 0; j < p; ++j)
                    states += ',' + format_double(r.p_diag[j]);
                states += '\n';
            }
        }
        detail::write_file(fs::path(out_dir) / ("states_" + name + ".csv"), states);

        std::string occ = "run_id,record_index,successes,failures";
        for (int j = 0; j < n; ++j)
            occ += ",theta_norm_" + std::to_string(j);
        occ += '\n';
        for (const RunRecord& run : runs) {
            for (std::size_t k = 0; k < run.final_memory.records.size(); ++k) {
                const AttemptRecord& rec = run.final_memory.records[k];
                occ += detail::csv_int(run.run_id) + ',' + detail::csv_int(k) + ',' +
                       detail::csv_int(rec.successes) + ',' + detail::csv_int(rec.failures);
                for (int j = 0; j < n; ++j)
                    occ += ',' + format_double(rec.theta_norm[j]);
                occ += '\n';
            }
        }
        detail::write_file(fs::path(out_dir) / ("occlusion_" + name + ".csv"), occ);
    }

    // Suite summary; movement ratios are relative to AL when it is present.
    double al_move_mean = 0.0;
    bool have_al = false;
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        if (cfg.methods[m] == Method::al) {
            al_move_mean = summarize_method(Method::al, suite.runs[m]).final_cum_move_deg.mean;
            have_al = true;
        }
    }
    std::string summary = "method,final_pos_err_mm_mean,final_pos_err_mm_std,"
                          "final_rot_err_deg_mean,final_rot_err_deg_std,cum_move_deg_mean,"
                          "cum_move_deg_std,move_ratio_vs_al,discarded_mean,discarded_std\n";
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        const MethodSummary s = summarize_method(cfg.methods[m], suite.runs[m]);
        summary += method_name(s.method) + ',' + format_double(s.final_pos_err_mm.mean) + ',' +
                   format_double(s.final_pos_err_mm.stddev) + ',' +
                   format_double(s.final_rot_err_deg.mean) + ',' +
                   format_double(s.final_rot_err_deg.stddev) + ',' +
                   format_double(s.final_cum_move_deg.mean) + ',' +
                   format_double(s.final_cum_move_deg.stddev) + ',';
        if (have_al && al_move_mean > 0.0)
            summary += format_double(s.final_cum_move_deg.mean / al_move_mean);
        summary += ',' + format_double(s.discarded.mean) + ',' + format_double(s.discarded.stddev) +
                   '\n';
    }
    detail::write_file(fs::path(out_dir) / "summary.csv", summary);

    std::string manifest = "# kincal " + std::string(kVersion) + " reproduction manifest\n";
    manifest += "# resolved per-run seeds (derived from master_seed):\n";
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        for (const RunRecord& run : suite.runs[m]) {
            manifest += "#   " + method_name(cfg.methods[m]) + " rep " +
                        detail::csv_int(run.run_id) + ": init=" + std::to_string(run.init_seed) +
                        " obs=" + std::to_string(run.obs_seed) + '\n';
        }
    }
    manifest += '\n' + experiment_to_config(cfg).serialize();
    detail::write_file(fs::path(out_dir) / "manifest.cfg", manifest);
}

// ---- config binding ----

namespace detail {

inline Eigen::Vector3d to_vec3(const std::vector<double>& v, const std::string& what) {
    if (v.size() != 3)
        throw std::invalid_argument("config: " + what + " needs 3 numbers");
    return Eigen::Vector3d(v[0], v[1], v[2]);
}

inline Eigen::Isometry3d to_transform(const std::vector<double>& v, const std::string& what) {
    if (v.size() != 6)
        throw std::invalid_argument("config: " + what + " needs 6 numbers (x y z rx ry rz)");
    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    t.translation() = Eigen::Vector3d(v[0], v[1], v[2]);
    t.linear() = so3_exp(Eigen::Vector3d(v[3], v[4], v[5]));
    return t;
}

inline std::string from_transform(const Eigen::Isometry3d& t) {
    const Eigen::Vector3d p = t.translation();
    const Eigen::Vector3d w = so3_log(t.linear());
    std::string out;
    for (int i = 0; i < 3; ++i)
        out += format_double(p[i]) + ' ';
    for (int i = 0; i < 3; ++i)
        out += format_double(w[i]) + (i < 2 ? " " : "");
    return out;
}

inline void check_known_keys(const ConfigDoc& doc, const std::string& section,
                             const std::set<std::string>& known,
                             const std::vector<std::string>& patterns = {}) {
    for (const std::string& key : doc.keys(section)) {
        if (known.count(key))
            continue;
        bool matched = false;
        for (const std::string& pat : patterns) {
            if (std::regex_match(key, std::regex(pat))) {
                matched = true;
                break;
            }
        }
        if (!matched)
            throw std::invalid_argument("config: unknown key '" + key + "' in [" + section + "]");
    }
}

}  // namespace detail

inline NoiseMode noise_mode_from_name(const std::string& s) {
    if (s == "pdn")
        return NoiseMode::pose_dependent;
    if (s == "cn")
        return NoiseMode::constant;
    throw std::invalid_argument("config: noise mode must be 'pdn' or 'cn', got '" + s + "'");
}

inline std::string noise_mode_name(NoiseMode m) {
    return m == NoiseMode::pose_dependent ? "pdn" : "cn";
}

inline ExperimentConfig experiment_from_config(const ConfigDoc& doc) {
    ExperimentConfig cfg;

    detail::check_known_keys(doc, "world",
                             {"joints", "base_position", "base_rotvec", "palm_marker",
                              "back_marker", "camera_position", "camera_axis",
                              "camera_fov_half_angle_deg", "max_view_angle_deg",
                              "require_frontal_workspace"},
                             {"dh_row_[0-9]+", "joint_limits_[0-9]+"});
    detail::check_known_keys(doc, "noise", {"noise_a", "noise_b", "constant_sigma2"});
    detail::check_known_keys(doc, "estimator",
                             {"q_diag", "init_width_linear_mm", "init_width_angular_deg"});
    detail::check_known_keys(doc, "occlusion", {"prior_a0", "prior_b0", "length_scale"});
    detail::check_known_keys(doc, "selection", {"penalty_a", "penalty_b", "gamma", "delta"});
    detail::check_known_keys(doc, "experiment",
                             {"methods", "iterations", "repetitions", "eval_set_size",
                              "noise_mode", "master_seed", "optimizer_budget",
                              "optimizer_epsilon", "threads", "out_dir"});

    const int n = doc.get_int("world", "joints");
    if (n < 1)
        throw std::invalid_argument("config: joints must be >= 1");
    cfg.true_table.rows.clear();
    cfg.limits.lower.resize(n);
    cfg.limits.upper.resize(n);
    for (int j = 0; j < n; ++j) {
        const auto row = doc.get_doubles("world", "dh_row_" + std::to_string(j));
        if (row.size() != 4)
            throw std::invalid_argument("config: dh_row_" + std::to_string(j) +
                                        " needs 4 numbers (a d alpha theta_off)");
        cfg.true_table.rows.push_back(DhRow{row[0], row[1], row[2], row[3]});
        const auto lim = doc.get_doubles("world", "joint_limits_" + std::to_string(j));
        if (lim.size() != 2)
            throw std::invalid_argument("config: joint_limits_" + std::to_string(j) +
                                        " needs 2 numbers (min max)");
        cfg.limits.lower[j] = lim[0];
        cfg.limits.upper[j] = lim[1];
    }
    cfg.limits.angles = cfg.limits.lower;

    Eigen::Isometry3d base = Eigen::Isometry3d::Identity();
    if (doc.has("world", "base_position"))
        base.translation() = detail::to_vec3(doc.get_doubles("world", "base_position"), "base_position");
    if (doc.has("world", "base_rotvec"))
        base.linear() = so3_exp(detail::to_vec3(doc.get_doubles("world", "base_rotvec"), "base_rotvec"));
    cfg.true_table.base_transform = base;

    cfg.palm_marker.offset = detail::to_transform(doc.get_doubles("world", "palm_marker"), "palm_marker");
    cfg.back_marker.offset = detail::to_transform(doc.get_doubles("world", "back_marker"), "back_marker");

    cfg.camera.position = detail::to_vec3(doc.get_doubles("world", "camera_position"), "camera_position");
    const Eigen::Vector3d axis = detail::to_vec3(doc.get_doubles("world", "camera_axis"), "camera_axis");
    if (axis.norm() < 1e-12)
        throw std::invalid_argument("config: camera_axis must be nonzero");
    cfg.camera.optical_axis = axis.normalized();
    cfg.camera.fov_half_angle_deg = doc.get_double("world", "camera_fov_half_angle_deg");
    cfg.visibility.max_view_angle_deg = doc.get_double("world", "max_view_angle_deg");
    cfg.visibility.require_frontal_workspace = doc.get_bool("world", "require_frontal_workspace");

    cfg.noise.noise_a = doc.get_double("noise", "noise_a");
    cfg.noise.noise_b = doc.get_double("noise", "noise_b");
    cfg.noise.constant_sigma2 = doc.get_double("noise", "constant_sigma2");

    cfg.q_diag = doc.get_double("estimator", "q_diag", cfg.q_diag);
    cfg.init_width_linear_mm = doc.get_double("estimator", "init_width_linear_mm", cfg.init_width_linear_mm);
    cfg.init_width_angular_deg =
        doc.get_double("estimator", "init_width_angular_deg", cfg.init_width_angular_deg);

    cfg.occlusion_prior_a0 = doc.get_double("occlusion", "prior_a0", cfg.occlusion_prior_a0);
    cfg.occlusion_prior_b0 = doc.get_double("occlusion", "prior_b0", cfg.occlusion_prior_b0);
    cfg.occlusion_length_scale = doc.get_double("occlusion", "length_scale", cfg.occlusion_length_scale);

    cfg.cost.penalty_a = doc.get_double("selection", "penalty_a", cfg.cost.penalty_a);
    cfg.cost.penalty_b = doc.get_double("selection", "penalty_b", cfg.cost.penalty_b);
    cfg.cost.gamma = doc.get_double("selection", "gamma", cfg.cost.gamma);
    cfg.cost.delta = doc.get_double("selection", "delta", cfg.cost.delta);

    cfg.methods.clear();
    for (const std::string& tok : doc.get_list("experiment", "methods"))
        cfg.methods.push_back(method_from_name(tok));
    cfg.iterations = doc.get_int("experiment", "iterations");
    cfg.repetitions = doc.get_int("experiment", "repetitions");
    cfg.eval_set_size = doc.get_int("experiment", "eval_set_size", cfg.eval_set_size);
    cfg.noise_mode = noise_mode_from_name(doc.get_string("experiment", "noise_mode", "pdn"));
    cfg.master_seed = doc.get_u64("experiment", "master_seed");
    cfg.optimizer_budget = doc.get_int("experiment", "optimizer_budget", cfg.optimizer_budget);
    cfg.optimizer_epsilon = doc.get_double("experiment", "optimizer_epsilon", cfg.optimizer_epsilon);
    cfg.threads = doc.get_int("experiment", "threads", cfg.threads);
    cfg.out_dir = doc.get_string("experiment", "out_dir", cfg.out_dir);

    cfg.validate();
    return cfg;
}

inline ConfigDoc experiment_to_config(const ExperimentConfig& cfg) {
    ConfigDoc doc;
    std::string methods;
    for (std::size_t i = 0; i < cfg.methods.size(); ++i)
        methods += method_name(cfg.methods[i]) + (i + 1 < cfg.methods.size() ? ", " : "");
    doc.set("experiment", "methods", methods);
    doc.set("experiment", "iterations", std::to_string(cfg.iterations));
    doc.set("experiment", "repetitions", std::to_string(cfg.repetitions));
    doc.set("experiment", "eval_set_size", std::to_string(cfg.eval_set_size));
    doc.set("experiment", "noise_mode", noise_mode_name(cfg.noise_mode));
    doc.set("experiment", "master_seed", std::to_string(cfg.master_seed));
    doc.set("experiment", "optimizer_budget", std::to_string(cfg.optimizer_budget));
    doc.set("experiment", "optimizer_epsilon", format_double(cfg.optimizer_epsilon));
    doc.set("experiment", "threads", std::to_string(cfg.threads));
    doc.set("experiment", "out_dir", cfg.out_dir);

    doc.set("world", "joints", std::to_string(cfg.true_table.joint_count()));
    for (int j = 0; j < cfg.true_table.joint_count(); ++j) {
        const DhRow& r = cfg.true_table.rows[j];
        doc.set("world", "dh_row_" + std::to_string(j),
                format_double(r.a) + ' ' + format_double(r.d) + ' ' + format_double(r.alpha) +
                    ' ' + format_double(r.theta_off));
        doc.set("world", "joint_limits_" + std::to_string(j),
                format_double(cfg.limits.lower[j]) + ' ' + format_double(cfg.limits.upper[j]));
    }
    const Eigen::Vector3d bp = cfg.true_table.base_transform.translation();
    const Eigen::Vector3d bw = so3_log(cfg.true_table.base_transform.linear());
    doc.set("world", "base_position",
            format_double(bp.x()) + ' ' + format_double(bp.y()) + ' ' + format_double(bp.z()));
    doc.set("world", "base_rotvec",
            format_double(bw.x()) + ' ' + format_double(bw.y()) + ' ' + format_double(bw.z()));
    doc.set("world", "palm_marker", detail::from_transform(cfg.palm_marker.offset));
    doc.set("world", "back_marker", detail::from_transform(cfg.back_marker.offset));
    doc.set("world", "camera_position",
            format_double(cfg.camera.position.x()) + ' ' + format_double(cfg.camera.position.y()) +
                ' ' + format_double(cfg.camera.position.z()));
    doc.set("world", "camera_axis",
            format_double(cfg.camera.optical_axis.x()) + ' ' +
                format_double(cfg.camera.optical_axis.y()) + ' ' +
                format_double(cfg.camera.optical_axis.z()));
    doc.set("world", "camera_fov_half_angle_deg", format_double(cfg.camera.fov_half_angle_deg));
    doc.set("world", "max_view_angle_deg", format_double(cfg.visibility.max_view_angle_deg));
    doc.set("world", "require_frontal_workspace",
            cfg.visibility.require_frontal_workspace ? "true" : "false");

    doc.set("noise", "noise_a", format_double(cfg.noise.noise_a));
    doc.set("noise", "noise_b", format_double(cfg.noise.noise_b));
    doc.set("noise", "constant_sigma2", format_double(cfg.noise.constant_sigma2));

    doc.set("estimator", "q_diag", format_double(cfg.q_diag));
    doc.set("estimator", "init_width_linear_mm", format_double(cfg.init_width_linear_mm));
    doc.set("estimator", "init_width_angular_deg", format_double(cfg.init_width_angular_deg));

    doc.set("occlusion", "prior_a0", format_double(cfg.occlusion_prior_a0));
    doc.set("occlusion", "prior_b0", format_double(cfg.occlusion_prior_b0));
    doc.set("occlusion", "length_scale", format_double(cfg.occlusion_length_scale));

    doc.set("selection", "penalty_a", format_double(cfg.cost.penalty_a));
    doc.set("selection", "penalty_b", format_double(cfg.cost.penalty_b));
    doc.set("selection", "gamma", format_double(cfg.cost.gamma));
    doc.set("selection", "delta", format_double(cfg.cost.delta));

    return doc;
}

}  // namespace kincal
