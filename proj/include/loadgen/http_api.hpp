#pragma once

#include <httplib.h>

#include <iosfwd>
#include <string>

#include "loadgen/service.hpp"

namespace loadgen {

/// HTTP status used for an error code in API responses.
int http_status(ErrorCode code) noexcept;

/// Registers the /api/runs routes. An empty token disables authentication;
/// otherwise requests must carry `X-Auth-Token: <token>` or
/// `Authorization: Bearer <token>`.
void install_routes(httplib::Server& server, RunManager& runs, std::string auth_token);

/// Socket options for the listener: address reuse without port sharing, so a
/// second server on the same port fails to bind.
void listener_socket_options(int sock);

/// Runs the service until SIGINT/SIGTERM. Returns 0 on clean shutdown and 4
/// when the listen address cannot be bound.
int serve(const ServiceConfig& config, std::ostream& log);

}  // namespace loadgen
