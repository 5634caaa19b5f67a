#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "rtlab/agents.hpp"
#include "rtlab/dataset.hpp"
#include "rtlab/eval.hpp"
#include "rtlab/models.hpp"
#include "rtlab/planner.hpp"
#include "rtlab/track.hpp"
#include "rtlab/trainers.hpp"
#include "rtlab/version.hpp"

namespace py = pybind11;
using namespace rtlab;

namespace {

// Planner borrows the map; keep both alive together for Python consumers.
struct PyPlanner {
    explicit PyPlanner(std::shared_ptr<TrackMap> m) : map(std::move(m)), planner(*map) {}
    std::shared_ptr<TrackMap> map;
    Planner planner;
};

py::dict sample_to_dict(const LabeledSample& s) {
    py::dict d;
    d["x"] = s.state.x;
    d["y"] = s.state.y;
    d["vx"] = s.state.vx;
    d["vy"] = s.state.vy;
    d["features"] = s.features;
    py::list labels;
    for (const Action a : s.labels) labels.append(py::make_tuple(a.ax, a.ay));
    d["labels"] = labels;
    return d;
}

py::dict report_to_dict(const AgentReport& r) {
    py::dict d;
    d["agent"] = r.agent;
    d["config"] = r.config;
    d["runs"] = r.runs;
    d["wins"] = r.wins;
    d["losses"] = r.losses;
    d["timeouts"] = r.timeouts;
    d["win_rate"] = r.win_rate;
    d["loss_rate"] = r.loss_rate;
    d["timeout_rate"] = r.timeout_rate;
    d["avg_return_disc"] = r.avg_return_disc;
    d["avg_return_raw"] = r.avg_return_raw;
    d["avg_steps_wins"] = r.has_steps ? py::cast(r.avg_steps_wins) : py::none();
    d["solvable_start_frac"] = r.solvable_start_frac;
    return d;
}

}  // namespace

PYBIND11_MODULE(_rtlab, m) {
    m.doc() = "Racetrack learning laboratory core";
    m.attr("__version__") = kVersion;

    py::class_<State>(m, "State")
        .def(py::init<int, int, int, int>(), py::arg("x"), py::arg("y"), py::arg("vx") = 0,
             py::arg("vy") = 0)
        .def_readwrite("x", &State::x)
        .def_readwrite("y", &State::y)
        .def_readwrite("vx", &State::vx)
        .def_readwrite("vy", &State::vy)
        .def("__repr__", [](const State& s) {
            return "State(" + std::to_string(s.x) + ", " + std::to_string(s.y) + ", " +
                   std::to_string(s.vx) + ", " + std::to_string(s.vy) + ")";
        });

    py::class_<TrackMap, std::shared_ptr<TrackMap>>(m, "TrackMap")
        .def_readonly("width", &TrackMap::width)
        .def_readonly("height", &TrackMap::height)
        .def_readonly("id", &TrackMap::id)
        .def_readonly("start_cells", &TrackMap::start_cells)
        .def_readonly("goal_cells", &TrackMap::goal_cells)
        .def("traversable", &TrackMap::traversable)
        .def("is_goal", &TrackMap::is_goal);

    m.def("parse_map",
          [](const std::string& text, const std::string& id) {
              return std::make_shared<TrackMap>(parse_map(text, id));
          },
          py::arg("text"), py::arg("id") = "");
    m.def("load_map", [](const std::string& path) {
        return std::make_shared<TrackMap>(load_map_file(path));
    });

    m.def("compute_trajectory", &compute_trajectory, py::arg("x"), py::arg("y"), py::arg("vx"),
          py::arg("vy"));

    m.def("step",
          [](const TrackMap& map, const State& s, int ax, int ay, bool noisy, std::uint64_t seed) {
              Rng rng(seed);
              const StepResult r = apply_action(map, s, Action{ax, ay}, noisy, rng);
              py::dict d;
              d["outcome"] = r.outcome.kind == StepOutcome::Kind::Moved        ? "moved"
                             : r.outcome.kind == StepOutcome::Kind::ReachedGoal ? "goal"
                                                                                : "crashed";
              d["reward"] = r.reward;
              d["noise_applied"] = r.noise_applied;
              if (r.outcome.kind == StepOutcome::Kind::Moved) d["next"] = r.outcome.next;
              d["trajectory"] = r.outcome.trajectory;
              return d;
          },
          py::arg("map"), py::arg("state"), py::arg("ax"), py::arg("ay"), py::arg("noisy") = false,
          py::arg("seed") = 0);

    m.def("encode_features", &encode_features);

    py::class_<PyPlanner>(m, "Planner")
        .def(py::init<std::shared_ptr<TrackMap>>())
        .def("is_solvable", [](PyPlanner& p, const State& s) { return p.planner.is_solvable(s); })
        .def("plan",
             [](PyPlanner& p, const State& s) -> py::object {
                 const auto plan = p.planner.astar(s);
                 if (!plan) return py::none();
                 py::dict d;
                 d["length"] = plan->length;
                 py::list fa, wit;
                 for (const Action a : plan->first_actions) fa.append(py::make_tuple(a.ax, a.ay));
                 for (const Action a : plan->witness) wit.append(py::make_tuple(a.ax, a.ay));
                 d["first_actions"] = fa;
                 d["witness"] = wit;
                 return d;
             })
        .def("classify_action", [](PyPlanner& p, const State& s, int ax, int ay) {
            switch (p.planner.classify_action(s, Action{ax, ay})) {
                case ActionQuality::Optimal: return "optimal";
                case ActionQuality::Secure: return "secure";
                case ActionQuality::Fatal: return "fatal";
            }
            return "secure";
        });

    m.def("generate_dataset",
          [](std::shared_ptr<TrackMap> map, const std::string& preset, std::size_t size,
             std::uint64_t seed, int velocity_bound) {
              Planner planner(*map);
              DatasetConfig dc;
              dc.preset = parse_preset(preset);
              dc.size = size;
              dc.velocity_bound = velocity_bound;
              Rng rng(derive_seed(seed, fnv1a64("gen-data")));
              py::list out;
              for (const auto& s : generate(*map, planner, dc, rng)) out.append(sample_to_dict(s));
              return out;
          },
          py::arg("map"), py::arg("preset"), py::arg("size"), py::arg("seed") = 0,
          py::arg("velocity_bound") = 5);

    py::class_<Mlp>(m, "Mlp")
        .def(py::init([](std::uint64_t seed) {
                 Rng rng(seed);
                 return mlp_init(rng);
             }),
             py::arg("seed") = 0)
        .def("forward", [](const Mlp& mlp, const FeatureVector& f) { return mlp_forward(mlp, f); })
        .def("greedy_action", [](const Mlp& mlp, const FeatureVector& f) {
            const Action a = greedy_action(mlp_forward(mlp, f));
            return py::make_tuple(a.ax, a.ay);
        });

    m.def("save_mlp", [](const Mlp& mlp, const std::string& path) { save_model(mlp, path); });
    m.def("load_mlp", [](const std::string& path) {
        const Model model = load_model(path);
        if (!std::holds_alternative<Mlp>(model)) throw std::runtime_error("model file is not an MLP");
        return std::get<Mlp>(model);
    });

    m.def("train_pil",
          [](const std::string& dataset_path, int epochs, double lr, int batch_size,
             std::uint64_t seed) {
              const auto data = read_dataset(dataset_path).samples;
              Rng rng(derive_seed(seed, fnv1a64("train-pil")));
              const PilResult res = train_pil(data, PilConfig{epochs, lr, batch_size}, rng);
              py::list checkpoints;
              for (const Checkpoint& c : res.checkpoints.checkpoints)
                  checkpoints.append(py::make_tuple(c.tag, c.model));
              py::dict d;
              d["checkpoints"] = checkpoints;
              d["epoch_losses"] = res.epoch_losses;
              return d;
          },
          py::arg("dataset_path"), py::arg("epochs") = 20, py::arg("lr") = 1e-3,
          py::arg("batch_size") = 32, py::arg("seed") = 0);

    m.def("train_dqn",
          [](std::shared_ptr<TrackMap> map, const std::string& mode, std::size_t episodes,
             std::uint64_t seed, double lr) {
              DqnConfig cfg;
              cfg.mode = parse_dqn_mode(mode);
              cfg.episodes = episodes;
              cfg.step_size = lr;
              Rng rng(derive_seed(seed, fnv1a64("train-dqn")));
              const DqnResult res = train_dqn(*map, cfg, rng);
              py::dict d;
              d["best"] = res.best;
              d["final"] = res.final;
              d["best_trailing100"] = res.best_trailing100;
              d["best_episode"] = res.best_episode;
              return d;
          },
          py::arg("map"), py::arg("mode"), py::arg("episodes"), py::arg("seed") = 0,
          py::arg("lr") = 1e-3);

    m.def("evaluate",
          [](std::shared_ptr<TrackMap> map, const std::string& preset,
             const std::vector<std::string>& agent_specs, std::size_t runs, std::uint64_t seed,
             int jobs) {
              Planner planner(*map);
              std::vector<std::unique_ptr<Agent>> owned;
              std::vector<Agent*> agents;
              for (const std::string& spec : agent_specs) {
                  if (spec == "expert")
                      owned.push_back(std::make_unique<ExpertAgent>(planner));
                  else if (spec == "random")
                      owned.push_back(std::make_unique<RandomAgent>());
                  else if (spec == "idle")
                      owned.push_back(std::make_unique<IdleAgent>());
                  else
                      owned.push_back(make_model_agent(load_model(spec), spec));
                  agents.push_back(owned.back().get());
              }
              EvalConfig ec;
              ec.preset = parse_eval_preset(preset);
              ec.runs = runs;
              ec.master_seed = seed;
              py::list out;
              for (const auto& r : evaluate_agents(agents, *map, planner, ec, jobs))
                  out.append(report_to_dict(r));
              return out;
          },
          py::arg("map"), py::arg("preset"), py::arg("agents"), py::arg("runs") = 1000,
          py::arg("seed") = 0, py::arg("jobs") = 1);
}
