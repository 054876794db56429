#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "mtcd2d/types.hpp"

namespace mtcd2d {

enum class MessageKind {
  SibDciConfig,
  DiscoveryAnnouncement,
  DiscoveryResponse,
  SecurityExchange,
  FormationReport,
  Page,
  DataPacket,
  D2dAck,
  RelayForward,
  BsAck,
};

enum class EpisodeKind { Transmit, Receive, PagingListen, ClockSync, CpEstablish, Sleep };

std::string_view to_string(MessageKind k);
std::string_view to_string(EpisodeKind k);

struct Message {
  MessageKind kind = MessageKind::DataPacket;
  NodeId src = 0;
  NodeId dst = 0;
  double payload_bits = 0.0;
  double timestamp = 0.0;
  bool positive = true;  // ACK vs NACK for DiscoveryResponse
};

/// One energy-relevant interval of a single device.
struct Episode {
  double start = 0.0;
  NodeId node = 0;
  EpisodeKind kind = EpisodeKind::Sleep;
  double duration = 0.0;
  double tx_power_dbm = 0.0;          // Transmit only
  std::optional<std::size_t> message;  // index into EventTrace::messages
};

struct EventTrace {
  std::vector<Message> messages;
  std::vector<Episode> episodes;

  std::size_t add_message(const Message& m) {
    messages.push_back(m);
    return messages.size() - 1;
  }
  void append(const EventTrace& other);
};

}  // namespace mtcd2d
