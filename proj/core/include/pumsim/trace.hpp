#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace pumsim {

enum class DramCommandKind { act, pre, rd, wr, ref };

const char* name(DramCommandKind kind);

struct DramCommand {
  DramCommandKind kind;
  uint32_t bank = 0;
  uint32_t row = 0;
  uint32_t column = 0;
};

// Scheduler-level events; one per serviced request or periodic operation
// (a single event usually covers several DRAM commands).
enum class EventKind { demand_read, demand_write, pum_op, refresh, trng_access };

const char* name(EventKind kind);

struct ScheduleEvent {
  double time_ns = 0;
  EventKind kind = EventKind::demand_read;
  uint32_t bank = 0;
  uint32_t row = 0;
  uint32_t column = 0;
  uint64_t cpu_cycles = 0;  // cycles charged to the requester, 0 for periodic work
};

class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void on_command(double /*time_ns*/, const DramCommand&) {}
  virtual void on_event(const ScheduleEvent&) {}
};

class VectorTraceSink : public TraceSink {
 public:
  void on_command(double time_ns, const DramCommand& c) override {
    commands.push_back({time_ns, c});
  }
  void on_event(const ScheduleEvent& e) override { events.push_back(e); }

  struct TimedCommand {
    double time_ns;
    DramCommand cmd;
  };
  std::vector<TimedCommand> commands;
  std::vector<ScheduleEvent> events;
};

// Streams `time_ns,command,bank,row,col,kind` rows; one line per DRAM
// command, kind column tells which scheduler event issued it.
class CsvTraceSink : public TraceSink {
 public:
  explicit CsvTraceSink(const std::string& path);
  void on_command(double time_ns, const DramCommand& c) override;
  void on_event(const ScheduleEvent& e) override;

 private:
  std::ofstream out_;
  EventKind current_ = EventKind::demand_read;
};

}  // namespace pumsim
