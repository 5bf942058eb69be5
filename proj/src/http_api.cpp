#include "loadgen/http_api.hpp"

#include <pthread.h>
#include <signal.h>
#include <sys/socket.h>

#include <atomic>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "loadgen/error.hpp"

namespace loadgen {

int http_status(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::validation_error:
        case ErrorCode::feature_conflict:
        case ErrorCode::invalid_argument:
        case ErrorCode::invalid_frame_length: return 400;
        case ErrorCode::unauthorized: return 401;
        case ErrorCode::unknown_run: return 404;
        case ErrorCode::port_busy:
        case ErrorCode::not_running:
        case ErrorCode::invalid_state: return 409;
        case ErrorCode::empty_plan: return 422;
        case ErrorCode::port_unavailable: return 503;
        default: return 500;
    }
}

namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e) {
    Json body{{"error", std::string(error_name(e.code()))}, {"message", e.what()}};
    if (!e.field().empty()) body["field"] = e.field();
    send_json(res, http_status(e.code()), body);
}

bool authorized(const httplib::Request& req, const std::string& token) {
    if (token.empty()) return true;
    if (req.get_header_value("X-Auth-Token") == token) return true;
    return req.get_header_value("Authorization") == "Bearer " + token;
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

// Wraps a route with the auth check and uniform error bodies.
Handler guarded(const std::string& token, Handler inner) {
    return [token, inner = std::move(inner)](const httplib::Request& req, httplib::Response& res) {
        if (!authorized(req, token)) {
            send_error(res, Error(ErrorCode::unauthorized, "missing or invalid auth token"));
            return;
        }
        try {
            inner(req, res);
        } catch (const Error& e) {
            send_error(res, e);
        } catch (const Json::exception& e) {
            send_error(res, Error(ErrorCode::validation_error, std::string("malformed JSON: ") + e.what()));
        } catch (const std::exception& e) {
            send_json(res, 500, {{"error", "internal"}, {"message", e.what()}});
        }
    };
}

}  // namespace

void listener_socket_options(int sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
}

void install_routes(httplib::Server& server, RunManager& runs, std::string auth_token) {
    const std::string run_path = R"(/api/runs/([A-Za-z0-9_.:-]+))";

    server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, {{"status", "ok"}});
    });

    server.Post("/api/runs", guarded(auth_token, [&runs](const httplib::Request& req, httplib::Response& res) {
                    const auto body = Json::parse(req.body);
                    send_json(res, 201, record_to_json(runs.create_run(body)));
                }));

    server.Get("/api/runs", guarded(auth_token, [&runs](const httplib::Request&, httplib::Response& res) {
                   Json list = Json::array();
                   for (const auto& r : runs.list_runs()) list.push_back(record_to_json(r));
                   send_json(res, 200, {{"runs", std::move(list)}});
               }));

    server.Get(run_path, guarded(auth_token, [&runs](const httplib::Request& req, httplib::Response& res) {
                   send_json(res, 200, record_to_json(runs.get_run(req.matches[1])));
               }));

    server.Post(run_path + "/start", guarded(auth_token, [&runs](const httplib::Request& req, httplib::Response& res) {
                    const auto mode = req.has_param("mode") ? req.get_param_value("mode") : std::string("simulate");
                    send_json(res, 200, record_to_json(runs.start_run(req.matches[1], parse_run_mode(mode))));
                }));

    server.Post(run_path + "/stop", guarded(auth_token, [&runs](const httplib::Request& req, httplib::Response& res) {
                    send_json(res, 200, record_to_json(runs.stop_run(req.matches[1])));
                }));

    server.Get(run_path + "/report", guarded(auth_token, [&runs](const httplib::Request& req, httplib::Response& res) {
                   const auto record = runs.get_run(req.matches[1]);
                   if (!record.report) {
                       send_json(res, 404, {{"error", "no-report"}, {"message", "run has no report yet"}});
                       return;
                   }
                   send_json(res, 200, *record.report);
               }));

    server.Get(run_path + "/capture", guarded(auth_token, [&runs](const httplib::Request& req, httplib::Response& res) {
                   const auto path = runs.capture_path(req.matches[1]);
                   if (!path) {
                       send_json(res, 404, {{"error", "no-capture"}, {"message", "run was not started in pcap mode"}});
                       return;
                   }
                   std::ifstream in(*path, std::ios::binary);
                   std::ostringstream buf;
                   buf << in.rdbuf();
                   res.status = 200;
                   res.set_content(buf.str(), "application/vnd.tcpdump.pcap");
               }));
}

int serve(const ServiceConfig& config, std::ostream& log) {
    // Block termination signals everywhere; a dedicated thread waits for them.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    sigaddset(&set, SIGUSR1);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    RunManager runs(config.data_dir, config.live_period_fraction);
    httplib::Server server;
    server.set_socket_options(listener_socket_options);
    install_routes(server, runs, config.auth_token);

    if (!server.bind_to_port(config.listen_host, config.listen_port)) {
        log << "error: cannot bind " << config.listen_host << ":" << config.listen_port << '\n';
        return 4;
    }
    log << "listening on " << config.listen_host << ":" << config.listen_port << ", data in "
        << config.data_dir.string() << std::endl;

    std::atomic<bool> listening{true};
    std::thread waiter([&] {
        int sig = 0;
        sigwait(&set, &sig);
        if (listening.load()) server.stop();
    });
    server.listen_after_bind();
    listening.store(false);
    pthread_kill(waiter.native_handle(), SIGUSR1);
    waiter.join();

    runs.shutdown();
    log << "shutdown complete" << std::endl;
    return 0;
}

}  // namespace loadgen
