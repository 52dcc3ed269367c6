#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>

#include <CLI11.hpp>

#include <tsvf/tsvf.hpp>

namespace {

using tsvf::Complex;
using tsvf::Json;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string fmt_complex(const Complex& c) {
    return fmt12(c.real()) + (c.imag() < 0 ? " - " : " + ") + fmt12(std::abs(c.imag())) + "i";
}

// Values read from --config take precedence over command-line flags.
struct ConfigOverrides {
    Json values = Json::object();

    void apply_string(const char* key, std::string& target) const {
        if (!values.contains(key)) return;
        if (!values.at(key).is_string())
            throw tsvf::ConfigError(std::string("config key '") + key + "' must be a string");
        target = values.at(key).get<std::string>();
    }
    void apply_double(const char* key, double& target) const {
        if (!values.contains(key)) return;
        if (!values.at(key).is_number())
            throw tsvf::ConfigError(std::string("config key '") + key + "' must be a number");
        target = values.at(key).get<double>();
    }
    void apply_uint(const char* key, std::uint64_t& target) const {
        if (!values.contains(key)) return;
        if (!values.at(key).is_number_unsigned())
            throw tsvf::ConfigError(std::string("config key '") + key +
                                    "' must be a nonnegative integer");
        target = values.at(key).get<std::uint64_t>();
    }
    void apply_unsigned(const char* key, unsigned& target) const {
        std::uint64_t v = target;
        apply_uint(key, v);
        target = static_cast<unsigned>(v);
    }
};

void emit_run_record(const tsvf::RunRecord& record) {
    std::cerr << record.to_json().dump() << "\n";
}

tsvf::Scenario load_or_fail(const std::string& id, const std::string& data_dir) {
    tsvf::Scenario sc = tsvf::load_scenario(id, data_dir);
    sc.circuit.ensure_valid();
    return sc;
}

struct WeakValueRow {
    std::string point;
    Complex value;
};

std::vector<WeakValueRow> weak_value_table(const tsvf::Scenario& sc, const tsvf::Selection& post) {
    std::vector<WeakValueRow> rows;
    for (const auto& [name, pt] : sc.circuit.marked_points()) {
        tsvf::TwoStateVector tsv = tsvf::two_state_at(sc.circuit, sc.pre, post, name);
        tsvf::WeakValue wv =
            tsvf::weak_value(tsv, tsvf::LocalProjector::on_path(pt.mode), "P[" + name + "]");
        rows.push_back({name, wv.value});
    }
    return rows;
}

int cmd_weak_values(const std::string& scenario, const std::string& post_text,
                    const std::string& format, const std::string& data_dir,
                    tsvf::RunRecord record) {
    tsvf::Scenario sc = load_or_fail(scenario, data_dir);
    tsvf::Selection post = tsvf::parse_post_selection(post_text);
    auto rows = weak_value_table(sc, post);
    if (format == "json") {
        Json jrows = Json::array();
        for (const auto& r : rows)
            jrows.push_back({{"point", r.point},
                             {"weak_value", {r.value.real(), r.value.imag()}},
                             {"shift_over_delta", r.value.real()}});
        Json out{{"command", "weak-values"},
                 {"scenario", scenario},
                 {"post", post_text},
                 {"points", jrows},
                 {"run_record", record.to_json()}};
        std::cout << out.dump(2) << "\n";
    } else if (format == "csv") {
        std::cout << "point,weak_value_re,weak_value_im,shift_over_delta\n";
        for (const auto& r : rows)
            std::cout << r.point << ',' << fmt17(r.value.real()) << ',' << fmt17(r.value.imag())
                      << ',' << fmt17(r.value.real()) << "\n";
    } else {
        std::printf("scenario %s, post-selection %s\n", scenario.c_str(), post_text.c_str());
        std::printf("%-8s %-24s %s\n", "point", "weak_value", "shift_over_delta");
        for (const auto& r : rows)
            std::printf("%-8s %-24s %s\n", r.point.c_str(), fmt_complex(r.value).c_str(),
                        fmt12(r.value.real()).c_str());
    }
    emit_run_record(record);
    return 0;
}

int cmd_pointer(const std::string& scenario, const std::string& post_text,
                const std::string& point, double epsilon, double width, const std::string& mode,
                const std::string& format, const std::string& data_dir, tsvf::RunRecord record) {
    tsvf::Scenario sc = load_or_fail(scenario, data_dir);
    tsvf::Selection post = tsvf::parse_post_selection(post_text);
    tsvf::PointerConfig cfg(width, epsilon);

    std::optional<double> first_order;
    std::optional<double> exact;
    if (mode == "first-order" || mode == "both") {
        tsvf::TwoStateVector tsv = tsvf::two_state_at(sc.circuit, sc.pre, post, point);
        tsvf::WeakValue wv = tsvf::weak_value(
            tsv, tsvf::LocalProjector::on_path(sc.circuit.marked_point(point).mode));
        first_order = tsvf::first_order_shift(wv, cfg);
    }
    if (mode == "exact" || mode == "both")
        exact = tsvf::exact_conditional_mean(sc.circuit, sc.pre, post, point, cfg);

    if (format == "json") {
        Json out{{"command", "pointer"}, {"scenario", scenario},   {"post", post_text},
                 {"point", point},       {"epsilon", epsilon},     {"width", width},
                 {"shift", cfg.shift()}, {"run_record", record.to_json()}};
        if (exact) out["exact_mean"] = *exact;
        if (first_order) out["first_order"] = *first_order;
        if (exact && first_order) out["difference"] = *exact - *first_order;
        std::cout << out.dump(2) << "\n";
    } else if (format == "csv") {
        std::cout << "scenario,post,point,epsilon,width,exact_mean,first_order,difference\n";
        std::cout << scenario << ',' << post_text << ',' << point << ',' << fmt17(epsilon) << ','
                  << fmt17(width) << ',' << (exact ? fmt17(*exact) : "") << ','
                  << (first_order ? fmt17(*first_order) : "") << ','
                  << (exact && first_order ? fmt17(*exact - *first_order) : "") << "\n";
    } else {
        std::printf("scenario %s, post-selection %s, point %s, epsilon %s, width %s\n",
                    scenario.c_str(), post_text.c_str(), point.c_str(), fmt12(epsilon).c_str(),
                    fmt12(width).c_str());
        if (first_order) std::printf("first_order  %s\n", fmt17(*first_order).c_str());
        if (exact) std::printf("exact_mean   %s\n", fmt17(*exact).c_str());
        if (exact && first_order)
            std::printf("difference   %s\n", fmt17(*exact - *first_order).c_str());
    }
    emit_run_record(record);
    return 0;
}

int cmd_ensemble(const std::string& scenario, const std::string& post_text, double epsilon,
                 double width, std::uint64_t trials, std::uint64_t seed, const std::string& out,
                 unsigned threads, const std::string& data_dir, tsvf::RunRecord record) {
    tsvf::Scenario sc = load_or_fail(scenario, data_dir);
    tsvf::EnsembleConfig cfg;
    cfg.post = tsvf::parse_post_selection(post_text);
    cfg.trials = trials;
    cfg.master_seed = seed;
    cfg.threads = threads;
    tsvf::PointerConfig pc(width, epsilon);
    for (const auto& [name, pt] : sc.circuit.marked_points()) cfg.couplings.push_back({name, pc});

    tsvf::EnsembleResult result = tsvf::run_ensemble(sc.circuit, sc.pre, cfg);

    std::ofstream file(out, std::ios::binary);
    if (!file) throw tsvf::ConfigError("cannot write '" + out + "'");
    file << "point,weak_value_re,weak_value_im,predicted_shift,estimated_shift,stderr,"
            "n_postselected,z\n";
    for (const auto& p : result.points) {
        file << p.point << ',' << fmt17(p.weak_value.real()) << ',' << fmt17(p.weak_value.imag())
             << ',' << fmt17(p.predicted_shift) << ',' << fmt17(p.estimated_shift) << ','
             << (p.stderr_ ? fmt17(*p.stderr_) : "") << ',' << p.n_postselected << ','
             << (p.z ? fmt17(*p.z) : "") << "\n";
    }
    file.close();

    std::printf("trials %llu, post-selected %llu (exact rate %s)\n",
                static_cast<unsigned long long>(result.trials),
                static_cast<unsigned long long>(result.n_postselected),
                fmt12(result.postselection_rate).c_str());
    for (const auto& [outcome, count] : result.outcome_counts)
        std::printf("  %-10s %llu\n", outcome.c_str(), static_cast<unsigned long long>(count));
    std::printf("wrote %s\n", out.c_str());

    record.seed = seed;
    record.rng = result.rng;
    record.outputs["csv"] = out;
    emit_run_record(record);
    return 0;
}

int cmd_sweep(const std::string& param, double from, double to, std::uint64_t steps,
              const std::string& scenario, const std::string& post_text, const std::string& point,
              double width, const std::string& out, const std::string& data_dir,
              tsvf::RunRecord record) {
    if (param != "epsilon")
        throw tsvf::ConfigError("only '--param epsilon' sweeps are supported");
    if (steps < 1 || !std::isfinite(from) || !std::isfinite(to) || to < from)
        throw tsvf::ConfigError("malformed sweep range: need finite from <= to and steps >= 1");
    tsvf::Scenario sc = load_or_fail(scenario, data_dir);
    tsvf::Selection post = tsvf::parse_post_selection(post_text);
    tsvf::TwoStateVector tsv = tsvf::two_state_at(sc.circuit, sc.pre, post, point);
    tsvf::WeakValue wv =
        tsvf::weak_value(tsv, tsvf::LocalProjector::on_path(sc.circuit.marked_point(point).mode));

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out.empty()) {
        file.open(out, std::ios::binary);
        if (!file) throw tsvf::ConfigError("cannot write '" + out + "'");
        os = &file;
    }
    *os << "epsilon,exact_shift,first_order_shift,difference\n";
    for (std::uint64_t i = 0; i < steps; ++i) {
        const double eps =
            steps == 1 ? from : from + (to - from) * static_cast<double>(i) / static_cast<double>(steps - 1);
        tsvf::PointerConfig cfg(width, eps);
        const double exact = tsvf::exact_conditional_mean(sc.circuit, sc.pre, post, point, cfg);
        const double first = tsvf::first_order_shift(wv, cfg);
        *os << fmt17(eps) << ',' << fmt17(exact) << ',' << fmt17(first) << ','
            << fmt17(exact - first) << "\n";
    }
    if (!out.empty()) record.outputs["csv"] = out;
    emit_run_record(record);
    return 0;
}

int cmd_leak_ratio(double epsilon, const std::string& format, tsvf::RunRecord record) {
    tsvf::LeakRatio lr = tsvf::leak_ratio(epsilon);
    if (format == "json") {
        Json out{{"command", "leak-ratio"},
                 {"epsilon", epsilon},
                 {"exact", lr.exact},
                 {"asymptotic", lr.asymptotic},
                 {"run_record", record.to_json()}};
        std::cout << out.dump(2) << "\n";
    } else if (format == "csv") {
        std::cout << "epsilon,exact,asymptotic\n"
                  << fmt17(epsilon) << ',' << fmt17(lr.exact) << ',' << fmt17(lr.asymptotic)
                  << "\n";
    } else {
        std::printf("epsilon     %s\n", fmt12(epsilon).c_str());
        std::printf("exact       %s\n", fmt17(lr.exact).c_str());
        std::printf("asymptotic  %s\n", fmt17(lr.asymptotic).c_str());
    }
    emit_run_record(record);
    return 0;
}

int cmd_scenarios(const std::string& action, const std::string& id, const std::string& format,
                  const std::string& data_dir, tsvf::RunRecord record) {
    if (action == "list") {
        for (const auto& s : tsvf::list_scenarios(data_dir)) std::cout << s << "\n";
        emit_run_record(record);
        return 0;
    }
    if (action != "show") throw tsvf::ConfigError("scenarios action must be 'list' or 'show'");
    if (id.empty()) throw tsvf::ConfigError("scenarios show needs a scenario id");
    tsvf::Scenario sc = load_or_fail(id, data_dir);
    if (format == "json") {
        Json points = Json::object();
        for (const auto& [name, pt] : sc.circuit.marked_points())
            points[name] = {{"boundary", pt.boundary}, {"mode", pt.mode}};
        Json detectors = Json::array();
        for (const auto& d : sc.circuit.detectors())
            detectors.push_back({{"name", d.name}, {"mode", d.mode}});
        Json wv = Json::object();
        for (const auto& [post, table] : sc.weak_values) {
            Json jt = Json::object();
            for (const auto& [pt, v] : table) jt[pt] = {v.real(), v.imag()};
            wv[post] = jt;
        }
        Json out{{"command", "scenarios"},
                 {"id", sc.id},
                 {"modes", sc.circuit.space()->paths()},
                 {"polarization", sc.circuit.space()->has_polarization()},
                 {"ancilla", sc.circuit.space()->has_ancilla()},
                 {"stage_count", sc.circuit.stage_count()},
                 {"marked_points", points},
                 {"detectors", detectors},
                 {"post_selections", sc.post_selections},
                 {"ideal_probabilities", sc.ideal_probabilities},
                 {"expected_weak_values", wv},
                 {"note", sc.note},
                 {"run_record", record.to_json()}};
        std::cout << out.dump(2) << "\n";
    } else {
        std::printf("scenario    %s\n", sc.id.c_str());
        std::printf("modes      ");
        for (const auto& m : sc.circuit.space()->paths()) std::printf(" %s", m.c_str());
        std::printf("\nfactors     %s%s\n",
                    sc.circuit.space()->has_polarization() ? "polarization " : "",
                    sc.circuit.space()->has_ancilla() ? "ancilla" : "");
        std::printf("stages      %zu\n", sc.circuit.stage_count());
        std::printf("points     ");
        for (const auto& [name, pt] : sc.circuit.marked_points())
            std::printf(" %s(boundary %zu, mode %s)", name.c_str(), pt.boundary, pt.mode.c_str());
        std::printf("\ndetectors  ");
        for (const auto& d : sc.circuit.detectors())
            std::printf(" %s<-%s", d.name.c_str(), d.mode.c_str());
        std::printf("\nposts      ");
        for (const auto& p : sc.post_selections) std::printf(" %s", p.c_str());
        std::printf("\n");
        for (const auto& [outcome, prob] : sc.ideal_probabilities)
            std::printf("P(%s) = %s\n", outcome.c_str(), fmt12(prob).c_str());
        for (const auto& [post, table] : sc.weak_values) {
            std::printf("weak values for %s:\n", post.c_str());
            for (const auto& [pt, v] : table)
                std::printf("  %-6s %s\n", pt.c_str(), fmt_complex(v).c_str());
        }
        if (!sc.note.empty()) std::printf("note: %s\n", sc.note.c_str());
    }
    emit_run_record(record);
    return 0;
}

int cmd_validate(const std::string& path, tsvf::RunRecord record) {
    std::vector<std::string> diags;
    try {
        tsvf::CircuitFile file = tsvf::load_circuit_file(path);
        diags = file.circuit.validate();
        for (const auto& [id, spec] : file.presets) {
            try {
                tsvf::Selection pre = tsvf::preset_pre_selection(file.circuit, spec);
                (void)pre;
            } catch (const std::exception& e) {
                diags.push_back(std::string("preset '") + id + "': " + e.what());
            }
            for (const auto& post : spec.post_selections) {
                try {
                    tsvf::Selection sel = tsvf::parse_post_selection(post);
                    if (!file.circuit.has_detector(sel.detector))
                        diags.push_back("preset '" + id + "': post-selection '" + post +
                                        "' names no detector");
                } catch (const std::exception& e) {
                    diags.push_back(std::string("preset '") + id + "': " + e.what());
                }
            }
        }
    } catch (const tsvf::ConfigError& e) {
        diags.push_back(e.what());
    }
    if (diags.empty()) {
        std::printf("ok: %s\n", path.c_str());
        emit_run_record(record);
        return 0;
    }
    for (const auto& d : diags) std::fprintf(stderr, "invalid: %s\n", d.c_str());
    emit_run_record(record);
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Forward/backward interferometer states, weak values, exact Gaussian-pointer "
                 "statistics, and seeded Monte Carlo ensembles"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(tsvf::kToolVersion));

    std::string data_dir = tsvf::default_data_dir();
    std::string config_path;
    unsigned threads = 0;
    app.add_option("--data-dir", data_dir, "Directory holding circuits/ and expected_values.json");
    app.add_option("--config", config_path,
                   "JSON file whose values override command-line flags");
    app.add_option("--threads", threads,
                   "Worker thread cap (0: TSVF_LAB_THREADS env var, else hardware)");

    std::string scenario, post, point, format = "table", mode = "both";
    double epsilon = 0.1, width = 1.0;
    std::uint64_t trials = 10000, seed = 0, steps = 0;
    double from = 0.0, to = 0.0;
    std::string param = "epsilon", out_path, action, show_id, validate_path;

    auto* wv_cmd = app.add_subcommand("weak-values", "Weak values of the point projectors");
    wv_cmd->add_option("--scenario", scenario)->required();
    wv_cmd->add_option("--post", post)->required();
    wv_cmd->add_option("--format", format)->check(CLI::IsMember({"table", "json", "csv"}));

    auto* ptr_cmd = app.add_subcommand("pointer", "Exact vs first-order conditional pointer shift");
    ptr_cmd->add_option("--scenario", scenario)->required();
    ptr_cmd->add_option("--post", post)->required();
    ptr_cmd->add_option("--point", point)->required();
    ptr_cmd->add_option("--epsilon", epsilon);
    ptr_cmd->add_option("--width", width);
    ptr_cmd->add_option("--mode", mode)->check(CLI::IsMember({"exact", "first-order", "both"}));
    ptr_cmd->add_option("--format", format)->check(CLI::IsMember({"table", "json", "csv"}));

    auto* ens_cmd = app.add_subcommand("ensemble", "Seeded Monte Carlo ensemble, CSV output");
    ens_cmd->add_option("--scenario", scenario)->required();
    ens_cmd->add_option("--post", post)->required();
    ens_cmd->add_option("--epsilon", epsilon);
    ens_cmd->add_option("--width", width);
    ens_cmd->add_option("--trials", trials);
    ens_cmd->add_option("--seed", seed);
    ens_cmd->add_option("--out", out_path)->required();

    auto* sweep_cmd = app.add_subcommand("sweep", "Sweep a parameter, tidy CSV output");
    sweep_cmd->add_option("--param", param);
    sweep_cmd->add_option("--from", from)->required();
    sweep_cmd->add_option("--to", to)->required();
    sweep_cmd->add_option("--steps", steps)->required();
    sweep_cmd->add_option("--scenario", scenario)->required();
    sweep_cmd->add_option("--post", post)->required();
    sweep_cmd->add_option("--point", point)->required();
    sweep_cmd->add_option("--width", width);
    sweep_cmd->add_option("--out", out_path);

    auto* leak_cmd = app.add_subcommand("leak-ratio", "Dark-output flux ratio, exact and asymptotic");
    leak_cmd->add_option("--epsilon", epsilon)->required();
    leak_cmd->add_option("--format", format)->check(CLI::IsMember({"table", "json", "csv"}));

    auto* sc_cmd = app.add_subcommand("scenarios", "List or show shipped scenario presets");
    sc_cmd->add_option("action", action, "'list' or 'show'")->required();
    sc_cmd->add_option("id", show_id, "scenario id for 'show'");
    sc_cmd->add_option("--format", format)->check(CLI::IsMember({"table", "json"}));

    auto* val_cmd = app.add_subcommand("validate", "Validate a circuit definition file");
    val_cmd->add_option("file", validate_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints help/usage text itself
        return code == 0 ? 0 : 1;     // contract: all usage errors exit 1
    }

    try {
        ConfigOverrides cfg;
        if (!config_path.empty()) {
            cfg.values = tsvf::load_json_file(config_path);
            if (!cfg.values.is_object())
                throw tsvf::ConfigError("config file must hold a JSON object");
            cfg.apply_string("data_dir", data_dir);
            cfg.apply_unsigned("threads", threads);
            cfg.apply_string("scenario", scenario);
            cfg.apply_string("post", post);
            cfg.apply_string("point", point);
            cfg.apply_string("format", format);
            cfg.apply_string("mode", mode);
            cfg.apply_string("param", param);
            cfg.apply_string("out", out_path);
            cfg.apply_double("epsilon", epsilon);
            cfg.apply_double("width", width);
            cfg.apply_double("from", from);
            cfg.apply_double("to", to);
            cfg.apply_uint("trials", trials);
            cfg.apply_uint("seed", seed);
            cfg.apply_uint("steps", steps);
        }

        tsvf::RunRecord record;
        Json jc{{"data_dir", data_dir}};
        if (!config_path.empty()) jc["config"] = config_path;

        if (wv_cmd->parsed()) {
            record.command = "weak-values";
            jc["scenario"] = scenario;
            jc["post"] = post;
            jc["format"] = format;
            record.config = jc;
            return cmd_weak_values(scenario, post, format, data_dir, record);
        }
        if (ptr_cmd->parsed()) {
            record.command = "pointer";
            jc["scenario"] = scenario;
            jc["post"] = post;
            jc["point"] = point;
            jc["epsilon"] = epsilon;
            jc["width"] = width;
            jc["mode"] = mode;
            jc["format"] = format;
            record.config = jc;
            return cmd_pointer(scenario, post, point, epsilon, width, mode, format, data_dir,
                               record);
        }
        if (ens_cmd->parsed()) {
            record.command = "ensemble";
            jc["scenario"] = scenario;
            jc["post"] = post;
            jc["epsilon"] = epsilon;
            jc["width"] = width;
            jc["trials"] = trials;
            jc["seed"] = seed;
            jc["out"] = out_path;
            jc["threads"] = threads;
            record.config = jc;
            return cmd_ensemble(scenario, post, epsilon, width, trials, seed, out_path, threads,
                                data_dir, record);
        }
        if (sweep_cmd->parsed()) {
            record.command = "sweep";
            jc["param"] = param;
            jc["from"] = from;
            jc["to"] = to;
            jc["steps"] = steps;
            jc["scenario"] = scenario;
            jc["post"] = post;
            jc["point"] = point;
            jc["width"] = width;
            if (!out_path.empty()) jc["out"] = out_path;
            record.config = jc;
            return cmd_sweep(param, from, to, steps, scenario, post, point, width, out_path,
                             data_dir, record);
        }
        if (leak_cmd->parsed()) {
            record.command = "leak-ratio";
            jc["epsilon"] = epsilon;
            jc["format"] = format;
            record.config = jc;
            return cmd_leak_ratio(epsilon, format, record);
        }
        if (sc_cmd->parsed()) {
            record.command = "scenarios";
            jc["action"] = action;
            if (!show_id.empty()) jc["id"] = show_id;
            jc["format"] = format;
            record.config = jc;
            return cmd_scenarios(action, show_id, format, data_dir, record);
        }
        if (val_cmd->parsed()) {
            record.command = "validate";
            jc["file"] = validate_path;
            record.config = jc;
            return cmd_validate(validate_path, record);
        }
        return 1;
    } catch (const tsvf::ImpossiblePostSelection& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const tsvf::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
