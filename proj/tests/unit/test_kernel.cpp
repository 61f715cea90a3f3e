#include <algorithm>
#include <sstream>
#include <string_view>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "drought/sim/kernel.hpp"
#include "drought/sim/rng.hpp"

namespace {

using namespace drought::sim;

struct Note {
  int value = 0;
};
std::string_view payload_tag(const Note&) { return "note"; }

struct Seen {
  std::uint64_t at;
  std::uint64_t seq;
  int value;
  EntityId from;
};

struct Fixture {
  Kernel<Note> kernel;
  std::vector<Seen> seen;

  explicit Fixture(std::uint32_t nodes = 3) {
    for (std::uint32_t i = 0; i < nodes; ++i) {
      kernel.add_entity(sensor_node(i), [this](const Delivery<Note>& d) {
        seen.push_back({d.at.seconds(), d.seq, d.payload.value, d.from});
      });
    }
  }
};

}  // namespace

TEST_CASE("zero-delay event at clock 0 is accepted and fires first") {
  Fixture f;
  f.kernel.schedule(SimTime(5), sensor_node(1), Note{2});
  f.kernel.schedule(SimTime(0), sensor_node(0), Note{1});
  CHECK(f.kernel.run_until(SimTime(10)) == 2);
  REQUIRE(f.seen.size() == 2);
  CHECK(f.seen[0].value == 1);
  CHECK(f.seen[0].at == 0);
}

TEST_CASE("simultaneous events fire in scheduling order") {
  Fixture f;
  f.kernel.schedule(SimTime(1800), sensor_node(2), Note{1});
  f.kernel.schedule(SimTime(1800), sensor_node(0), Note{2});
  f.kernel.run_until(SimTime(1800));
  REQUIRE(f.seen.size() == 2);
  CHECK(f.seen[0].value == 1);
  CHECK(f.seen[1].value == 2);
  CHECK(f.seen[0].seq < f.seen[1].seq);
}

TEST_CASE("scheduling in the past is rejected") {
  Fixture f;
  f.kernel.schedule(SimTime(10), sensor_node(0), Note{});
  f.kernel.run_until(SimTime(10));
  CHECK(f.kernel.now() == SimTime(10));
  CHECK_THROWS_AS(f.kernel.schedule(SimTime(5), sensor_node(0), Note{}), drought::SchedulingInPast);
}

TEST_CASE("run_until on an empty queue processes nothing") {
  Fixture f;
  CHECK(f.kernel.run_until(SimTime(100)) == 0);
  CHECK(f.kernel.now() == SimTime(0));
}

TEST_CASE("run_until stops at the horizon") {
  Fixture f;
  for (int t = 1; t <= 3; ++t) f.kernel.schedule(SimTime(t), sensor_node(0), Note{t});
  CHECK(f.kernel.run_until(SimTime(2)) == 2);
  CHECK(f.kernel.pending() == 1);
  CHECK(f.kernel.now() == SimTime(2));
  CHECK(f.kernel.next_event_time() == SimTime(3));
}

TEST_CASE("send_delayed delivers at clock + delay with provenance") {
  Fixture f;
  f.kernel.schedule(SimTime(7), sensor_node(1), Note{0});
  f.kernel.run_until(SimTime(7));
  f.kernel.send_delayed(sensor_node(1), sensor_node(2), Note{9}, 3);
  f.kernel.run_until(SimTime(100));
  REQUIRE(f.seen.size() == 2);
  CHECK(f.seen[1].at == 10);
  CHECK(f.seen[1].from == sensor_node(1));
}

TEST_CASE("zero-delay send lands after already-queued events of the same time") {
  Fixture f;
  f.kernel.add_entity(sensor_node(5), [&](const Delivery<Note>& d) {
    f.seen.push_back({d.at.seconds(), d.seq, d.payload.value, d.from});
    if (d.payload.value == 1) f.kernel.send_delayed(sensor_node(5), sensor_node(2), Note{3}, 0);
  });
  f.kernel.schedule(SimTime(4), sensor_node(5), Note{1});
  f.kernel.schedule(SimTime(4), sensor_node(0), Note{2});
  f.kernel.run_until(SimTime(4));
  REQUIRE(f.seen.size() == 3);
  CHECK(f.seen[0].value == 1);
  CHECK(f.seen[1].value == 2);
  CHECK(f.seen[2].value == 3);
  CHECK(f.seen[2].at == 4);
}

TEST_CASE("send_delayed from or to an unknown entity throws") {
  Fixture f;
  CHECK_THROWS_AS(f.kernel.send_delayed(sensor_node(99), sensor_node(0), Note{}, 1),
                  drought::UnknownEntity);
  CHECK_THROWS_AS(f.kernel.send_delayed(sensor_node(0), local_base_station(0), Note{}, 1),
                  drought::UnknownEntity);
}

TEST_CASE("a chain of three hops with delay d arrives at 3d") {
  constexpr Seconds d = 4;
  Kernel<Note> kernel;
  std::uint64_t arrived = 0;
  for (std::uint32_t i = 0; i < 4; ++i) {
    kernel.add_entity(sensor_node(i), [&, i](const Delivery<Note>& del) {
      if (i == 3) {
        arrived = del.at.seconds();
        return;
      }
      kernel.send_delayed(sensor_node(i), sensor_node(i + 1), Note{}, d);
    });
  }
  kernel.schedule(SimTime(0), sensor_node(0), Note{});
  kernel.run_until(SimTime(1000));
  CHECK(arrived == 3 * d);
}

TEST_CASE("trace lines are tab separated time, seq, target and tag") {
  Fixture f;
  std::ostringstream trace;
  f.kernel.set_trace(&trace);
  f.kernel.schedule(SimTime(3), sensor_node(1), Note{});
  f.kernel.run_until(SimTime(3));
  CHECK(trace.str() == "3\t0\tnode:1\tnote\n");
}

TEST_CASE("randomized schedule processes in exact (fire_at, seq) order") {
  Kernel<Note> kernel;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> seen;
  kernel.add_entity(sensor_node(0), [&](const Delivery<Note>& d) {
    seen.emplace_back(d.at.seconds(), d.seq);
  });
  RngStream rng(7, "kernel-order");
  std::vector<std::pair<std::uint64_t, std::uint64_t>> expected;
  for (int i = 0; i < 20'000; ++i) {
    const SimTime t(rng.uniform_int(0, 500));  // heavy timestamp collisions
    const auto seq = kernel.schedule(t, sensor_node(0), Note{i});
    expected.emplace_back(t.seconds(), seq);
  }
  std::sort(expected.begin(), expected.end());
  kernel.run_until(SimTime(1000));
  CHECK(seen == expected);
}

TEST_CASE("identical schedules produce identical traces") {
  auto run = [] {
    Kernel<Note> kernel;
    std::ostringstream trace;
    kernel.set_trace(&trace);
    RngStream rng(11, "trace");
    kernel.add_entity(sensor_node(0), [&](const Delivery<Note>& d) {
      if (d.payload.value < 200) {
        kernel.send_delayed(sensor_node(0), sensor_node(0), Note{d.payload.value + 1},
                            rng.uniform_int(0, 3));
      }
    });
    kernel.schedule(SimTime(0), sensor_node(0), Note{0});
    kernel.run_until(SimTime(10'000));
    return trace.str();
  };
  CHECK(run() == run());
}

TEST_CASE("rng streams are reproducible and independent per label") {
  RngStream a(42, "node:1");
  RngStream b(42, "node:1");
  RngStream c(42, "node:2");
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs |= x != c.next_u64();
  }
  CHECK(differs);

  RngStream u(1, "u");
  for (int i = 0; i < 1000; ++i) {
    const auto v = u.uniform_int(1, 16);
    CHECK(v >= 1);
    CHECK(v <= 16);
    const double x = u.uniform01();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
}
