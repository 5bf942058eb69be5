#include <cerrno>
#include <cstring>

#include <linux/if_packet.h>
#include <net/ethernet.h>
#include <net/if.h>
#include <sys/socket.h>
#include <unistd.h>

#include "loadgen/error.hpp"
#include "loadgen/wire_sim.hpp"

namespace loadgen {

namespace {

// AF_PACKET transmit socket bound to one interface. Needs CAP_NET_RAW.
class RawSocketPort : public TransmitPort {
public:
    explicit RawSocketPort(std::string ifname) : id_(std::move(ifname)) {
        const unsigned index = ::if_nametoindex(id_.c_str());
        if (index == 0) {
            throw Error(ErrorCode::port_unavailable, "no such interface '" + id_ + "'", "port");
        }
        fd_ = ::socket(AF_PACKET, SOCK_RAW, 0);
        if (fd_ < 0) {
            throw Error(ErrorCode::port_unavailable,
                        "cannot open raw socket on '" + id_ + "': " + std::strerror(errno), "port");
        }
        sockaddr_ll addr{};
        addr.sll_family = AF_PACKET;
        addr.sll_ifindex = static_cast<int>(index);
        if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
            const auto err = errno;
            ::close(fd_);
            throw Error(ErrorCode::port_unavailable,
                        "cannot bind raw socket to '" + id_ + "': " + std::strerror(err), "port");
        }
    }

    ~RawSocketPort() override { close(); }

    const std::string& id() const noexcept override { return id_; }

    void send(std::span<const std::uint8_t> frame, SteadyClock::time_point not_before) override {
        if (fd_ < 0) throw Error(ErrorCode::send_failure, "port " + id_ + " is closed");
        wait_until(not_before);
        const auto n = ::send(fd_, frame.data(), frame.size(), 0);
        if (n != static_cast<ssize_t>(frame.size())) {
            throw Error(ErrorCode::send_failure, "send on '" + id_ + "' failed: " + std::strerror(errno));
        }
    }

    void close() override {
        if (fd_ >= 0) {
            ::close(fd_);
            fd_ = -1;
        }
    }

    bool is_open() const noexcept override { return fd_ >= 0; }

private:
    std::string id_;
    int fd_ = -1;
};

}  // namespace

std::shared_ptr<TransmitPort> open_port(const std::string& port_id) {
    if (port_id.starts_with("virtual:")) return std::make_shared<VirtualPort>(port_id);
    if (port_id.empty() || port_id.size() >= IF_NAMESIZE) {
        throw Error(ErrorCode::port_unavailable, "invalid port id '" + port_id + "'", "port");
    }
    return std::make_shared<RawSocketPort>(port_id);
}

}  // namespace loadgen
