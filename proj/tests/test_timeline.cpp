#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cplab/timeline.hpp"

using namespace cplab;

namespace {
const GraphTopology& pair_graph() {
  static const GraphTopology g = GraphTopology::build(HalfLineExtent{2});
  return g;
}
}  // namespace

TEST_SUITE("timeline") {

TEST_CASE("generation is deterministic in the key and varies across keys") {
  const GraphTopology g = GraphTopology::build(LatticeExtent{1, 3});
  const TimeWindow w{-2.0, 5.0};
  const EventTimeline a = EventTimeline::generate(g, 1.5, w, {11, 22});
  const EventTimeline b = EventTimeline::generate(g, 1.5, w, {11, 22});
  const EventTimeline c = EventTimeline::generate(g, 1.5, w, {11, 23});
  REQUIRE(a.events().size() == b.events().size());
  for (std::size_t i = 0; i < a.events().size(); ++i) {
    CHECK(a.events()[i].time == b.events()[i].time);
    CHECK(a.events()[i].from == b.events()[i].from);
    CHECK(a.events()[i].to == b.events()[i].to);
  }
  bool differ = c.events().size() != a.events().size();
  for (std::size_t i = 0; !differ && i < a.events().size(); ++i) {
    differ = a.events()[i].time != c.events()[i].time;
  }
  CHECK(differ);
}

TEST_CASE("all event times are strictly increasing inside the window") {
  const GraphTopology g = GraphTopology::build(LatticeExtent{1, 4});
  for (std::uint64_t k = 0; k < 200; ++k) {
    const EventTimeline tl = EventTimeline::generate(g, 2.0, {0.0, 3.0}, {k, 5});
    double prev = 0.0;
    bool first = true;
    for (const Event& e : tl.events()) {
      CHECK(e.time > 0.0);
      CHECK(e.time <= 3.0);
      if (!first) CHECK(e.time > prev);
      prev = e.time;
      first = false;
    }
  }
}

TEST_CASE("recovery marks carry no source; transmissions carry an arrow") {
  const EventTimeline tl = EventTimeline::generate(pair_graph(), 2.0, {0.0, 4.0}, {3, 4});
  std::uint64_t recs = 0, arrows = 0;
  for (const Event& e : tl.events()) {
    if (e.is_recovery()) {
      CHECK(e.from < 2);
      CHECK(e.to == kNoVertex);
      ++recs;
    } else {
      CHECK(e.from < 2);
      CHECK(e.to < 2);
      CHECK(e.from != e.to);
      ++arrows;
    }
  }
  CHECK(recs == tl.recovery_count());
  CHECK(arrows == tl.transmission_count());
}

TEST_CASE("event counts follow the prescribed rates") {
  // One vertex, window mass 3: P(no recovery) = e^-3 = 0.049787068367863944.
  const GraphTopology one = GraphTopology::build(HalfLineExtent{1});
  int zero = 0;
  const int n = 60000;
  for (int i = 0; i < n; ++i) {
    if (EventTimeline::generate(one, 0.0, {0.0, 3.0}, replica_key(77, i)).events().empty()) {
      ++zero;
    }
  }
  double p = 0.049787068367863944;
  double sd = std::sqrt(p * (1 - p) / n);
  CHECK(std::abs(double(zero) / n - p) < 5.0 * sd);

  // Two vertices, lambda 1.5, unit window: total event mass 2 + 2*1.5 = 5.
  int zero2 = 0;
  for (int i = 0; i < n; ++i) {
    if (EventTimeline::generate(pair_graph(), 1.5, {0.0, 1.0}, replica_key(78, i))
            .events()
            .empty()) {
      ++zero2;
    }
  }
  p = std::exp(-5.0);
  sd = std::sqrt(p * (1 - p) / n);
  CHECK(std::abs(double(zero2) / n - p) < 5.0 * sd);
}

TEST_CASE("lambda zero produces recoveries only") {
  const GraphTopology g = GraphTopology::build(LatticeExtent{1, 2});
  const EventTimeline tl = EventTimeline::generate(g, 0.0, {0.0, 10.0}, {1, 1});
  CHECK(tl.transmission_count() == 0);
  CHECK(tl.recovery_count() == tl.events().size());
  CHECK(tl.recovery_count() > 0);
}

TEST_CASE("from_events accepts a hand-built history and range() half-opens it") {
  std::vector<Event> ev;
  ev.push_back({0.5, 0, kNoVertex});   // recovery at 0
  ev.push_back({1.0, 0, 1});           // transmission 0 -> 1
  ev.push_back({1.5, 1, kNoVertex});   // recovery at 1
  ev.push_back({2.0, 1, 0});           // transmission 1 -> 0
  const EventTimeline tl = EventTimeline::from_events(pair_graph(), 1.0, {0.0, 2.0}, {9, 9}, ev);
  CHECK(tl.events().size() == 4);

  // (a, b] selection: the left end is exclusive, the right end inclusive.
  auto [lo, hi] = tl.range(0.5, 1.5);
  CHECK(lo == 1);
  CHECK(hi == 3);
  auto [l2, h2] = tl.range(0.0, 0.5);
  CHECK(l2 == 0);
  CHECK(h2 == 1);
  auto [l3, h3] = tl.range(2.0, 2.0);
  CHECK(l3 == h3);

  CHECK(tl.recoveries_at(0) == std::vector<double>{0.5});
  CHECK(tl.recoveries_at(1) == std::vector<double>{1.5});
  CHECK(tl.transmissions_on(0, 1) == std::vector<double>{1.0});
  CHECK(tl.transmissions_on(1, 0) == std::vector<double>{2.0});
}

TEST_CASE("from_events rejects malformed histories") {
  auto mk = [&](std::vector<Event> ev) {
    return EventTimeline::from_events(pair_graph(), 1.0, {0.0, 2.0}, {9, 9}, ev);
  };
  CHECK_THROWS(mk({{0.0, 0, kNoVertex}}));              // at the open left end
  CHECK_THROWS(mk({{2.5, 0, kNoVertex}}));              // beyond the window
  CHECK_THROWS(mk({{1.0, 0, kNoVertex}, {1.0, 0, 1}})); // tied times
  CHECK_THROWS(mk({{1.5, 0, kNoVertex}, {1.0, 0, 1}})); // unsorted
  CHECK_THROWS(mk({{1.0, 0, 0}}));                      // self-loop
  CHECK_THROWS(mk({{1.0, 1, 5}}));                      // vertex out of range
}

TEST_CASE("filter keeps recoveries and the selected arrows in order") {
  const GraphTopology g = GraphTopology::build(HalfLineExtent{3});
  const EventTimeline tl = EventTimeline::generate(g, 2.0, {0.0, 5.0}, {21, 0});
  const EventTimeline kept = tl.filter_transmissions([](VertexId from, VertexId to) {
    return from == 0 && to == 1;
  });
  CHECK(kept.recovery_count() == tl.recovery_count());
  CHECK(kept.transmissions_on(0, 1) == tl.transmissions_on(0, 1));
  CHECK(kept.transmissions_on(1, 0).empty());
  CHECK(kept.transmissions_on(1, 2).empty());
  CHECK(kept.lambda() == tl.lambda());
  CHECK(kept.key() == tl.key());
  double prev = 0.0;
  for (const Event& e : kept.events()) {
    CHECK(e.time > prev);
    prev = e.time;
  }
}

TEST_CASE("thinning bounds: keep-all, drop-all, subset") {
  const GraphTopology g = GraphTopology::build(HalfLineExtent{3});
  const EventTimeline tl = EventTimeline::generate(g, 2.0, {0.0, 5.0}, {22, 0});
  const EventTimeline all = tl.thin_transmissions(1.0, 7);
  CHECK(all.events().size() == tl.events().size());
  const EventTimeline none = tl.thin_transmissions(0.0, 7);
  CHECK(none.transmission_count() == 0);
  CHECK(none.recovery_count() == tl.recovery_count());
  const EventTimeline half = tl.thin_transmissions(0.5, 7);
  CHECK(half.transmission_count() <= tl.transmission_count());
  // Every kept transmission appears in the source at the same instant.
  for (const Event& e : half.events()) {
    if (e.is_recovery()) continue;
    const auto src = tl.transmissions_on(e.from, e.to);
    CHECK(std::find(src.begin(), src.end(), e.time) != src.end());
  }
  // Same salt reproduces the same thinning.
  const EventTimeline again = tl.thin_transmissions(0.5, 7);
  CHECK(again.events().size() == half.events().size());
}

TEST_CASE("slice restricts to a subwindow") {
  const GraphTopology g = GraphTopology::build(HalfLineExtent{3});
  const EventTimeline tl = EventTimeline::generate(g, 1.0, {0.0, 6.0}, {23, 0});
  const EventTimeline mid = tl.slice(2.0, 4.0);
  CHECK(mid.window().t0 == 2.0);
  CHECK(mid.window().t1 == 4.0);
  auto [lo, hi] = tl.range(2.0, 4.0);
  REQUIRE(mid.events().size() == hi - lo);
  for (std::size_t i = 0; i < mid.events().size(); ++i) {
    CHECK(mid.events()[i].time == tl.events()[lo + i].time);
  }
  CHECK_THROWS(tl.slice(-1.0, 3.0));
}

TEST_CASE("export format carries the header and one line per event") {
  std::vector<Event> ev;
  ev.push_back({0.25, 1, kNoVertex});
  ev.push_back({0.75, 1, 0});
  const EventTimeline tl = EventTimeline::from_events(pair_graph(), 0.5, {0.0, 1.0}, {5, 6}, ev);
  std::ostringstream os;
  tl.export_events(os);
  std::string expected = "# topology " + hex64(pair_graph().hash()) +
                         " lambda 0.5 window 0 1 key " + hex64(5) + " " + hex64(6) +
                         "\nX 1 0.25\nA 1 0 0.75\n";
  CHECK(os.str() == expected);
}

}  // TEST_SUITE
