#include "loadgen/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <ostream>

#include "loadgen/analyzer.hpp"
#include "loadgen/error.hpp"
#include "loadgen/http_api.hpp"
#include "loadgen/json_codec.hpp"
#include "loadgen/render.hpp"
#include "loadgen/service.hpp"
#include "loadgen/wire_sim.hpp"

namespace loadgen {

namespace {

struct SpecFlags {
    std::string spec_file;
    std::string load;
    std::uint32_t frame_size = 60;
    std::int64_t frames = 0;
    std::string duration;
    std::int64_t bursts = 0;
    std::string burst_interval;
    std::string sleep_interval;
    std::string rate = "100M";
    std::string src_mac;
    std::string dst_mac;
    std::string ethertype;
    std::string vlan;
    std::string fill;
    std::string port = "virtual:0";

    CLI::Option* frames_opt = nullptr;
    CLI::Option* duration_opt = nullptr;
    CLI::Option* bursts_opt = nullptr;
    CLI::Option* load_opt = nullptr;
    CLI::Option* port_opt = nullptr;
    CLI::Option* spec_opt = nullptr;
};

void add_spec_flags(CLI::App* cmd, SpecFlags& f) {
    f.spec_opt = cmd->add_option("--spec", f.spec_file, "LoadSpec JSON file (same schema as the HTTP API)");
    f.load_opt = cmd->add_option("--load", f.load, "load in percent, (0, 100]");
    cmd->add_option("--frame-size", f.frame_size, "frame size P in bytes (presets: 60 128 256 512 1020 1514)")
        ->check(CLI::Range(kMinFrameLen, kMaxFrameLen));
    f.frames_opt = cmd->add_option("--frames", f.frames, "send a fixed number of frames");
    f.duration_opt = cmd->add_option("--duration", f.duration, "generate for a duration (h, min, s, ms, us, ns)");
    f.bursts_opt = cmd->add_option("--bursts", f.bursts, "number of bursts");
    auto* bi = cmd->add_option("--burst-interval", f.burst_interval, "length of each burst");
    auto* si = cmd->add_option("--sleep-interval", f.sleep_interval, "idle time between bursts");
    f.frames_opt->excludes(f.duration_opt)->excludes(f.bursts_opt);
    f.duration_opt->excludes(f.bursts_opt);
    bi->needs(f.bursts_opt);
    si->needs(f.bursts_opt);
    f.bursts_opt->needs(bi)->needs(si);
    for (auto* o : {f.frames_opt, f.duration_opt, f.bursts_opt}) o->excludes(f.spec_opt);
    cmd->add_option("--rate", f.rate, "line rate: 100M or 1G")->capture_default_str();
    cmd->add_option("--src-mac", f.src_mac, "source MAC address");
    cmd->add_option("--dst-mac", f.dst_mac, "destination MAC address");
    cmd->add_option("--ethertype", f.ethertype, "Ethertype (default 0x8892)");
    cmd->add_option("--vlan", f.vlan, "VLAN tag as pcp.cfi.vid");
    cmd->add_option("--fill", f.fill, "payload fill: const:0xNN, inc or random:SEED");
    f.port_opt = cmd->add_option("--port", f.port, "transmit port (virtual:<name> or an interface)")->capture_default_str();
}

LoadSpec spec_from_flags(const SpecFlags& f) {
    if (!f.spec_file.empty()) {
        std::ifstream in(f.spec_file);
        if (!in) throw Error(ErrorCode::validation_error, "cannot read spec file '" + f.spec_file + "'");
        return spec_from_json(Json::parse(in));
    }
    if (f.load.empty()) throw Error(ErrorCode::validation_error, "--load is required", "load_percent");

    LoadSpec spec;
    spec.load = LoadFraction::from_percent(f.load);
    spec.frame.frame_len_p = f.frame_size;
    spec.rate = parse_line_rate(f.rate);
    if (!f.src_mac.empty()) spec.frame.src = MacAddress::parse(f.src_mac);
    if (!f.dst_mac.empty()) spec.frame.dst = MacAddress::parse(f.dst_mac);
    if (!f.ethertype.empty()) spec.frame.ethertype = parse_ethertype(f.ethertype);
    if (!f.vlan.empty()) spec.frame.vlan = VlanTag::parse(f.vlan);
    if (!f.fill.empty()) spec.frame.payload_fill = PayloadFill::parse(f.fill);
    spec.port = f.port;

    if (f.frames_opt->count()) {
        spec.feature = FramesFeature{f.frames};
    } else if (f.duration_opt->count()) {
        spec.feature = DurationFeature{parse_duration(f.duration)};
    } else if (f.bursts_opt->count()) {
        spec.feature = BurstFeature{f.bursts, parse_duration(f.burst_interval), parse_duration(f.sleep_interval)};
    } else {
        throw Error(ErrorCode::validation_error, "one of --frames, --duration or --bursts is required", "feature");
    }
    spec.validate();
    return spec;
}

bool json_output(const std::string& format) { return format == "json"; }

void print_json(std::ostream& out, const Json& j) { out << j.dump() << '\n'; }

int cmd_plan(const SpecFlags& flags, const std::string& format, std::ostream& out) {
    const auto plan = make_plan(spec_from_flags(flags));
    if (json_output(format)) {
        print_json(out, plan_to_json(plan));
    } else {
        render_plan(out, plan);
    }
    return kExitOk;
}

int cmd_generate(const SpecFlags& flags, const std::string& format, const std::string& mode, const std::string& out_path,
                 std::ostream& out, std::ostream& err) {
    const auto spec = spec_from_flags(flags);
    const auto plan = make_plan(spec);

    if (mode == "live") {
        if (!flags.port_opt->count() && flags.spec_file.empty()) {
            err << "error: --mode live requires --port\n";
            return kExitUsage;
        }
        std::shared_ptr<TransmitPort> port;
        try {
            port = open_port(spec.port);
        } catch (const Error& e) {
            err << "error: " << e.what() << '\n';
            return kExitPort;
        }
        auto run = transmit(plan, spec.frame, port);
        const auto progress = run->wait();
        const auto observations = observe(*run);
        Json summary{{"outcome", std::string(to_string(progress.outcome))},
                     {"frames_planned", plan.frames_total},
                     {"frames_sent", progress.frames_sent},
                     {"elapsed_ns", progress.elapsed_ns}};
        if (!observations.empty()) {
            summary["report"] = report_to_json(measure(observations, plan.rate, live_split_threshold(plan)));
        }
        if (json_output(format)) {
            print_json(out, summary);
        } else {
            out << "live run on " << spec.port << ": " << to_string(progress.outcome) << '\n'
                << "  frames sent " << progress.frames_sent << " of " << plan.frames_total << '\n'
                << "  elapsed     " << format_duration(progress.elapsed_ns) << " (planned "
                << format_duration(plan.elapsed_ns) << ")\n";
        }
        if (progress.outcome == RunOutcome::failed) {
            err << "error: " << progress.error << '\n';
            return kExitPort;
        }
        return kExitOk;
    }

    const auto trace = execute(plan, spec.frame, 0);
    std::uint64_t written = 0;
    if (mode == "pcap") {
        if (out_path.empty()) {
            err << "error: --mode pcap requires --out\n";
            return kExitUsage;
        }
        written = write_pcap_file(trace, out_path);
    }
    const auto report = measure(observe(trace), plan.rate, burst_split_threshold(plan));
    const auto verdict = verify(report, plan);
    if (json_output(format)) {
        Json j{{"plan", plan_to_json(plan)}, {"report", report_to_json(report)}, {"verdict", verdict_to_json(verdict)}};
        if (mode == "pcap") j["pcap"] = {{"path", out_path}, {"bytes", written}};
        print_json(out, j);
    } else {
        render_plan(out, plan);
        render_report(out, report);
        render_verdict(out, verdict);
        if (mode == "pcap") out << "wrote " << written << " bytes to " << out_path << '\n';
    }
    return kExitOk;
}

int cmd_analyze(const SpecFlags& flags, bool expect, const std::string& pcap_path, const Tolerance& tol,
                const std::string& format, std::ostream& out, std::ostream& err) {
    std::optional<TransmissionPlan> plan;
    if (expect) plan = make_plan(spec_from_flags(flags));
    const auto rate = plan ? plan->rate : parse_line_rate(flags.rate);

    std::vector<CapturedFrame> frames;
    try {
        frames = read_pcap_file(pcap_path);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    const auto observations = observe(frames);
    CaptureReport report;
    try {
        report = plan ? measure(observations, rate, burst_split_threshold(*plan)) : measure(observations, rate);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    std::optional<Verdict> verdict;
    if (plan) verdict = verify(report, *plan, tol);
    if (json_output(format)) {
        Json j{{"report", report_to_json(report)}};
        if (verdict) j["verdict"] = verdict_to_json(*verdict);
        print_json(out, j);
    } else {
        render_report(out, report);
        if (verdict) render_verdict(out, *verdict);
    }
    return (verdict && !verdict->pass) ? kExitVerifyFailed : kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Deterministic Ethernet load generation: plan, generate, analyze, serve"};
    app.name("loadgen");
    app.require_subcommand(1);
    app.fallthrough();

    std::string format = "table";
    app.add_option("--format", format, "output format")->check(CLI::IsMember({"table", "json"}))->capture_default_str();

    SpecFlags plan_flags;
    auto* plan_cmd = app.add_subcommand("plan", "compute and print a transmission plan");
    add_spec_flags(plan_cmd, plan_flags);

    SpecFlags gen_flags;
    std::string mode = "sim";
    std::string out_path;
    auto* gen_cmd = app.add_subcommand("generate", "run a plan on the virtual wire, to a pcap file, or on a port");
    add_spec_flags(gen_cmd, gen_flags);
    gen_cmd->add_option("--mode", mode, "sim, pcap or live")
        ->check(CLI::IsMember({"sim", "pcap", "live"}))
        ->capture_default_str();
    gen_cmd->add_option("--out", out_path, "pcap output path");

    SpecFlags an_flags;
    std::string pcap_path;
    bool expect = false;
    Tolerance tol;
    auto* an_cmd = app.add_subcommand("analyze", "measure a pcap capture, optionally against an expected spec");
    an_cmd->add_option("--pcap", pcap_path, "capture file")->required();
    an_cmd->add_flag("--expect", expect, "verify against the plan described by the spec flags");
    an_cmd->add_option("--tol-period", tol.period_ns, "period tolerance in ns (0 = exact)");
    an_cmd->add_option("--tol-load", tol.load, "load tolerance as a fraction (0 = exact)");
    add_spec_flags(an_cmd, an_flags);

    std::string config_path;
    auto* serve_cmd = app.add_subcommand("serve", "run the HTTP run-control service");
    serve_cmd->add_option("--config", config_path, "service config JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*plan_cmd) return cmd_plan(plan_flags, format, out);
        if (*gen_cmd) return cmd_generate(gen_flags, format, mode, out_path, out, err);
        if (*an_cmd) return cmd_analyze(an_flags, expect, pcap_path, tol, format, out, err);
        if (*serve_cmd) {
            const auto cfg = ServiceConfig::load(config_path.empty() ? std::nullopt
                                                                     : std::optional<std::filesystem::path>(config_path));
            return serve(cfg, err);
        }
    } catch (const Error& e) {
        err << "error: " << error_name(e.code()) << ": " << e.what() << '\n';
        return e.code() == ErrorCode::port_unavailable || e.code() == ErrorCode::send_failure ? kExitPort : kExitUsage;
    } catch (const Json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace loadgen
