/* Copyright 2026 The p1echo Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "p1echo/common.hpp"
#include "p1echo/constants.hpp"
#include "p1echo/spin_core.hpp"

// Pulse-sequence AST, its canonical text form, and compilation to a timed
// schedule of ideal rotations and free-evolution intervals.
namespace p1echo {

/// 1-based position in the source text.
struct SourcePos {
  int line = 1;
  int col = 1;
};

enum class AngleForm { pi, half_pi, degrees };

struct Pulse {
  Axis axis = Axis::x;
  AngleForm form = AngleForm::pi;
  double degrees = 180.0;
  /// Spin addressed by the pulse; empty means the probe (central) spin.
  std::string target;
  SourcePos pos;

  double angle() const {
    switch (form) {
      case AngleForm::pi: return constants::pi;
      case AngleForm::half_pi: return 0.5 * constants::pi;
      case AngleForm::degrees: return degrees * constants::pi / 180.0;
    }
    return constants::pi;
  }
  friend bool operator==(const Pulse& a, const Pulse& b) {
    return a.axis == b.axis && a.form == b.form && a.target == b.target &&
           (a.form != AngleForm::degrees || a.degrees == b.degrees);
  }
};

/// Either `tau_multiple * tau` or a literal duration `value` in `unit`.
struct Delay {
  std::optional<double> tau_multiple = 1.0;
  double value = 0.0;
  std::string unit = "us";
  SourcePos pos;

  bool symbolic() const { return tau_multiple.has_value(); }
  double literal_seconds() const {
    if (unit == "s") return value;
    if (unit == "ms") return value * 1e-3;
    if (unit == "us") return value * 1e-6;
    if (unit == "ns") return value * 1e-9;
    throw Error("unknown time unit '" + unit + "'");
  }
  friend bool operator==(const Delay& a, const Delay& b) {
    if (a.symbolic() != b.symbolic()) return false;
    if (a.symbolic()) return *a.tau_multiple == *b.tau_multiple;
    return a.value == b.value && a.unit == b.unit;
  }
};

struct Item;

struct Repeat {
  std::vector<Item> block;
  int count = 1;
  SourcePos pos;
};

struct Item {
  std::variant<Pulse, Delay, Repeat> node;
};

inline bool operator==(const Repeat& a, const Repeat& b);
inline bool operator==(const Item& a, const Item& b) { return a.node == b.node; }
inline bool operator==(const Repeat& a, const Repeat& b) {
  return a.count == b.count && a.block == b.block;
}

struct PulseProgram {
  std::vector<Item> items;
  std::string name;
  /// Sensing window of the NV in DEER-type experiments (bookkeeping only).
  std::optional<double> t_s;

  friend bool operator==(const PulseProgram& a, const PulseProgram& b) { return a.items == b.items; }
};

// ---------------------------------------------------------------------------
// Canonical printer
// ---------------------------------------------------------------------------

/// Shortest text that reads back to the same double.
inline std::string format_shortest(double v) {
  std::array<char, 64> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), r.ptr);
}

inline std::string axis_name(Axis a) {
  switch (a) {
    case Axis::x: return "x";
    case Axis::y: return "y";
    case Axis::minus_x: return "-x";
    case Axis::minus_y: return "-y";
  }
  return "x";
}

namespace detail {

inline void print_items(const std::vector<Item>& items, std::string& out);

inline void print_item(const Item& it, std::string& out) {
  if (const auto* p = std::get_if<Pulse>(&it.node)) {
    switch (p->form) {
      case AngleForm::pi: out += "pi"; break;
      case AngleForm::half_pi: out += "pi/2"; break;
      case AngleForm::degrees: out += format_shortest(p->degrees) + "deg"; break;
    }
    out += "(" + axis_name(p->axis);
    if (!p->target.empty()) out += ", " + p->target;
    out += ")";
  } else if (const auto* d = std::get_if<Delay>(&it.node)) {
    if (!d->symbolic())
      out += format_shortest(d->value) + d->unit;
    else if (*d->tau_multiple == 1.0)
      out += "tau";
    else
      out += format_shortest(*d->tau_multiple) + "*tau";
  } else {
    const auto& r = std::get<Repeat>(it.node);
    out += "[";
    print_items(r.block, out);
    out += "]^" + std::to_string(r.count);
  }
}

inline void print_items(const std::vector<Item>& items, std::string& out) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += " - ";
    print_item(items[i], out);
  }
}

}  // namespace detail

/// Byte-stable text form; parse_sequence(print_program(p)) == p.
inline std::string print_program(const PulseProgram& p) {
  std::string out;
  detail::print_items(p.items, out);
  return out;
}

// ---------------------------------------------------------------------------
// Schedule
// ---------------------------------------------------------------------------

struct RotationEvent {
  Axis axis = Axis::x;
  double angle = constants::pi;
  std::string target;
};

struct EvolutionEvent {
  double duration = 0.0;  // s
};

using ScheduleEvent = std::variant<RotationEvent, EvolutionEvent>;

struct Schedule {
  std::vector<ScheduleEvent> events;
  double total_time = 0.0;  // s
  /// total_time = tau_coefficient * tau + fixed_time.
  double tau_coefficient = 0.0;
  double fixed_time = 0.0;

  std::size_t rotation_count() const {
    std::size_t n = 0;
    for (const auto& e : events) n += std::holds_alternative<RotationEvent>(e);
    return n;
  }
};

namespace detail {

inline void flatten(const std::vector<Item>& items, double tau, Schedule& s) {
  for (const auto& it : items) {
    if (const auto* p = std::get_if<Pulse>(&it.node)) {
      s.events.emplace_back(RotationEvent{p->axis, p->angle(), p->target});
    } else if (const auto* d = std::get_if<Delay>(&it.node)) {
      double dt;
      if (d->symbolic()) {
        dt = *d->tau_multiple * tau;
        s.tau_coefficient += *d->tau_multiple;
      } else {
        dt = d->literal_seconds();
        s.fixed_time += dt;
      }
      // Adjacent delays form one free-evolution interval.
      if (!s.events.empty() && std::holds_alternative<EvolutionEvent>(s.events.back()))
        std::get<EvolutionEvent>(s.events.back()).duration += dt;
      else
        s.events.emplace_back(EvolutionEvent{dt});
    } else {
      const auto& r = std::get<Repeat>(it.node);
      if (r.count < 1) throw Error("repeat count must be >= 1");
      for (int k = 0; k < r.count; ++k) flatten(r.block, tau, s);
    }
  }
}

}  // namespace detail

/// Flattens repeats and substitutes tau (seconds).
inline Schedule compile_schedule(const PulseProgram& prog, double tau) {
  if (!(tau >= 0.0)) throw Error("tau must be >= 0");
  Schedule s;
  detail::flatten(prog.items, tau, s);
  for (const auto& e : s.events)
    if (const auto* ev = std::get_if<EvolutionEvent>(&e)) s.total_time += ev->duration;
  return s;
}

}  // namespace p1echo
