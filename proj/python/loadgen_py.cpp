#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "loadgen/analyzer.hpp"
#include "loadgen/json_codec.hpp"
#include "loadgen/load_engine.hpp"
#include "loadgen/wire_sim.hpp"

namespace py = pybind11;
using namespace loadgen;

namespace {

// Specs cross the boundary as JSON: either a str or anything json.dumps takes.
Json to_json(const py::object& obj) {
    if (py::isinstance<py::str>(obj)) return Json::parse(obj.cast<std::string>());
    auto dumps = py::module_::import("json").attr("dumps");
    return Json::parse(dumps(obj).cast<std::string>());
}

py::object to_py(const Json& json) {
    auto loads = py::module_::import("json").attr("loads");
    return loads(json.dump());
}

// Percent given as str or number; numbers go through repr to stay exact.
LoadFraction load_arg(const py::object& percent) {
    return LoadFraction::from_percent(py::str(percent).cast<std::string>());
}

std::int64_t duration_arg(const py::object& value) {
    if (py::isinstance<py::str>(value)) return parse_duration(value.cast<std::string>());
    return value.cast<std::int64_t>();
}

py::dict verdict_bundle(const TransmissionPlan& plan, const CaptureReport& report, const Verdict& verdict) {
    py::dict out;
    out["plan"] = to_py(plan_to_json(plan));
    out["report"] = to_py(report_to_json(report));
    out["verdict"] = to_py(verdict_to_json(verdict));
    return out;
}

}  // namespace

PYBIND11_MODULE(_loadgen, m) {
    m.doc() = "Deterministic Ethernet load planning and capture analysis";

    static py::exception<Error> loadgen_error(m, "LoadgenError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = py::reinterpret_borrow<py::object>(loadgen_error.ptr())(std::string(e.what()));
            exc.attr("code") = std::string(error_name(e.code()));
            exc.attr("field") = e.field();
            PyErr_SetObject(loadgen_error.ptr(), exc.ptr());
        } catch (const Json::exception& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    m.def(
        "slot_size",
        [](std::uint32_t frame_len_p, bool vlan) {
            FrameSpec spec;
            spec.frame_len_p = frame_len_p;
            if (vlan) spec.vlan = VlanTag{};
            return slot_size(spec).slot_bytes;
        },
        py::arg("frame_len_p"), py::arg("vlan") = false, "Wire slot S = P + overhead, in bytes.");

    m.def(
        "extra_gap", [](std::int64_t slot, const py::object& percent) { return extra_gap(slot, load_arg(percent)); },
        py::arg("slot_bytes"), py::arg("load_percent"), "Gap bytes added beyond the minimum, rounded up.");
    m.def("total_gap", &total_gap, py::arg("extra_gap_bytes"));
    m.def(
        "occupancy", [](std::int64_t slot, const std::string& rate) { return occupancy(slot, parse_line_rate(rate)); },
        py::arg("slot_bytes"), py::arg("rate") = "100M", "Wire time of one slot in ns.");
    m.def(
        "period",
        [](std::int64_t slot, std::int64_t gap, const std::string& rate) {
            return period(slot, gap, parse_line_rate(rate));
        },
        py::arg("slot_bytes"), py::arg("extra_gap_bytes"), py::arg("rate") = "100M", "Frame-to-frame period in ns.");
    m.def(
        "frames_for_duration",
        [](std::int64_t slot, const py::object& percent, const py::object& duration, const std::string& rate) {
            return frames_for_duration(parse_line_rate(rate), slot, load_arg(percent).value(), duration_arg(duration));
        },
        py::arg("slot_bytes"), py::arg("load_percent"), py::arg("duration"), py::arg("rate") = "100M");
    m.def("elapsed", &elapsed, py::arg("frames"), py::arg("period_ns"));
    m.def(
        "time_deficit",
        [](const py::object& duration, std::int64_t elapsed_ns, std::int64_t period_ns) {
            return time_deficit(duration_arg(duration), elapsed_ns, period_ns);
        },
        py::arg("duration"), py::arg("elapsed_ns"), py::arg("period_ns"));
    m.def("parse_duration", [](const std::string& text) { return parse_duration(text); }, py::arg("text"));
    m.def("format_duration", &format_duration, py::arg("ns"));

    m.def(
        "make_plan", [](const py::object& spec) { return to_py(plan_to_json(make_plan(spec_from_json(to_json(spec))))); },
        py::arg("spec"), "Plan for a load spec given as a dict or JSON string.");

    m.def(
        "simulate",
        [](const py::object& spec_obj, const std::optional<std::string>& pcap_path) {
            const auto spec = spec_from_json(to_json(spec_obj));
            const auto plan = make_plan(spec);
            const auto trace = execute(plan, spec.frame);
            if (pcap_path) write_pcap_file(trace, *pcap_path);
            const auto frames = observe(trace);
            const auto report = measure(frames, plan.rate, burst_split_threshold(plan));
            return verdict_bundle(plan, report, verify(report, plan));
        },
        py::arg("spec"), py::arg("pcap_path") = py::none(),
        "Runs the spec on the simulated wire and verifies the result exactly.");

    m.def(
        "write_pcap",
        [](const py::object& spec_obj, const std::string& path) {
            const auto spec = spec_from_json(to_json(spec_obj));
            return write_pcap_file(execute(make_plan(spec), spec.frame), path);
        },
        py::arg("spec"), py::arg("path"), "Writes the simulated trace as pcap; returns the byte count.");

    m.def(
        "analyze_pcap",
        [](const std::string& path, const py::object& expect, double tol_period_ns, double tol_load) -> py::object {
            const auto captured = read_pcap_file(path);
            const auto frames = observe(captured);
            if (expect.is_none()) {
                const auto report = measure(frames, LineRate::fast_ethernet);
                return to_py(report_to_json(report));
            }
            const auto spec = spec_from_json(to_json(expect));
            const auto plan = make_plan(spec);
            const auto report = measure(frames, plan.rate, burst_split_threshold(plan));
            return verdict_bundle(plan, report, verify(report, plan, Tolerance{tol_period_ns, tol_load}));
        },
        py::arg("path"), py::arg("expect") = py::none(), py::arg("tol_period_ns") = 0.0, py::arg("tol_load") = 0.0);

    m.def(
        "build_frame",
        [](const py::object& spec_obj, std::uint32_t seq) {
            const auto spec = spec_from_json(to_json(spec_obj));
            const auto bytes = build_frame(spec.frame, seq);
            return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        },
        py::arg("spec"), py::arg("seq") = 0);

    m.def(
        "parse_frame",
        [](const py::bytes& data) {
            const std::string raw = data;
            const auto parsed = parse_frame(
                std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));
            py::dict out;
            out["seq"] = parsed.seq;
            out["src_mac"] = parsed.spec.src.to_string();
            out["dst_mac"] = parsed.spec.dst.to_string();
            out["ethertype"] = ethertype_to_string(parsed.spec.ethertype);
            out["frame_len_p"] = parsed.spec.frame_len_p;
            out["payload_fill"] = parsed.spec.payload_fill.to_string();
            if (parsed.spec.vlan) {
                py::dict v;
                v["pcp"] = parsed.spec.vlan->priority;
                v["cfi"] = parsed.spec.vlan->cfi;
                v["vid"] = parsed.spec.vlan->vid;
                out["vlan"] = v;
            } else {
                out["vlan"] = py::none();
            }
            return out;
        },
        py::arg("data"));
}
