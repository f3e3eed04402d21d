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

#include <cctype>
#include <charconv>
#include <string>
#include <string_view>

#include "p1echo/pulse_program.hpp"

// Recursive-descent parser for the pulse-sequence language:
//
//   sequence := item ('-' item)*
//   item     := pulse | delay | repeat
//   pulse    := ('pi' | 'pi/2' | FLOAT 'deg') '(' axis [',' IDENT] ')'
//   delay    := [FLOAT ['*']] 'tau' | FLOAT unit
//   repeat   := '[' sequence ']' '^' INT
//   axis     := 'x' | 'y' | '-x' | '-y'
//   unit     := 's' | 'ms' | 'us' | 'ns'
//
// Whitespace is ignored, keywords are case-insensitive and '#' starts a
// comment that runs to the end of the line.
namespace p1echo {

class ParseError : public Error {
 public:
  ParseError(const std::string& what, SourcePos pos)
      : Error(what + " at " + std::to_string(pos.line) + ":" + std::to_string(pos.col)), pos_(pos) {}
  SourcePos pos() const { return pos_; }

 private:
  SourcePos pos_;
};

namespace detail {

class SequenceParser {
 public:
  explicit SequenceParser(std::string_view text) : text_(text) {}

  std::vector<Item> parse_all() {
    skip_space();
    if (at_end()) throw ParseError("empty sequence", here());
    auto items = parse_sequence();
    skip_space();
    if (!at_end()) throw ParseError(std::string("unexpected '") + peek() + "'", here());
    return items;
  }

 private:
  std::string_view text_;
  std::size_t i_ = 0;
  SourcePos pos_;

  bool at_end() const { return i_ >= text_.size(); }
  char peek(std::size_t ahead = 0) const {
    return i_ + ahead < text_.size() ? static_cast<char>(std::tolower(static_cast<unsigned char>(text_[i_ + ahead]))) : '\0';
  }
  SourcePos here() const { return pos_; }
  void advance() {
    if (text_[i_] == '\n') {
      ++pos_.line;
      pos_.col = 1;
    } else {
      ++pos_.col;
    }
    ++i_;
  }
  void skip_space() {
    while (!at_end()) {
      if (std::isspace(static_cast<unsigned char>(text_[i_]))) {
        advance();
      } else if (text_[i_] == '#') {
        while (!at_end() && text_[i_] != '\n') advance();
      } else {
        break;
      }
    }
  }
  void expect(char c) {
    skip_space();
    if (peek() != c) {
      const std::string got = at_end() ? "end of input" : std::string("'") + peek() + "'";
      throw ParseError(std::string("expected '") + c + "' but found " + got, here());
    }
    advance();
  }
  bool keyword(std::string_view kw) {
    for (std::size_t k = 0; k < kw.size(); ++k)
      if (peek(k) != kw[k]) return false;
    for (std::size_t k = 0; k < kw.size(); ++k) advance();
    return true;
  }
  std::string word() {
    std::string w;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(text_[i_])) || text_[i_] == '_')) {
      w += peek();
      advance();
    }
    return w;
  }

  double number() {
    const SourcePos start = here();
    std::size_t j = i_;
    const auto digit = [&](std::size_t k) {
      return k < text_.size() && std::isdigit(static_cast<unsigned char>(text_[k]));
    };
    while (digit(j)) ++j;
    if (j < text_.size() && text_[j] == '.') {
      ++j;
      while (digit(j)) ++j;
    }
    // An exponent only when digits follow, so "2e" is not swallowed.
    if (j < text_.size() && (text_[j] == 'e' || text_[j] == 'E')) {
      std::size_t k = j + 1;
      if (k < text_.size() && (text_[k] == '+' || text_[k] == '-')) ++k;
      if (digit(k)) {
        j = k;
        while (digit(j)) ++j;
      }
    }
    double v = 0.0;
    const auto r = std::from_chars(text_.data() + i_, text_.data() + j, v);
    if (r.ec != std::errc() || r.ptr != text_.data() + j) throw ParseError("malformed number", start);
    while (i_ < j) advance();
    return v;
  }

  std::vector<Item> parse_sequence() {
    std::vector<Item> items;
    items.push_back(parse_item());
    for (;;) {
      skip_space();
      if (peek() != '-') break;
      advance();
      items.push_back(parse_item());
    }
    return items;
  }

  Item parse_item() {
    skip_space();
    const SourcePos start = here();
    if (at_end()) throw ParseError("expected a pulse, delay or repeat but found end of input", start);
    const char c = peek();
    if (c == '[') return {parse_repeat()};
    if (keyword("tau")) return {Delay{1.0, 0.0, "us", start}};
    if (peek() == 'p' && peek(1) == 'i') {
      advance();
      advance();
      Pulse p;
      p.pos = start;
      p.form = AngleForm::pi;
      if (peek() == '/') {
        advance();
        if (peek() != '2') throw ParseError("only pi and pi/2 are named angles", here());
        advance();
        p.form = AngleForm::half_pi;
      }
      p.degrees = p.form == AngleForm::pi ? 180.0 : 90.0;
      return {parse_pulse_args(p)};
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const double v = number();
      skip_space();
      if (peek() == '*') {
        advance();
        skip_space();
        if (!keyword("tau")) throw ParseError("expected 'tau' after '*'", here());
        return {Delay{v, 0.0, "us", start}};
      }
      if (keyword("tau")) return {Delay{v, 0.0, "us", start}};
      if (keyword("deg")) {
        if (!(v > 0.0 && v <= 360.0)) throw ParseError("pulse angle must lie in (0, 360] deg", start);
        Pulse p;
        p.pos = start;
        p.form = AngleForm::degrees;
        p.degrees = v;
        return {parse_pulse_args(p)};
      }
      const SourcePos unit_pos = here();
      const std::string unit = word();
      if (unit == "s" || unit == "ms" || unit == "us" || unit == "ns")
        return {Delay{std::nullopt, v, unit, start}};
      throw ParseError(unit.empty() ? "expected a unit, 'tau' or 'deg' after number"
                                    : "unknown unit '" + unit + "'",
                       unit_pos);
    }
    const std::string w = word();
    throw ParseError(w.empty() ? std::string("unexpected '") + c + "'" : "unknown keyword '" + w + "'",
                     start);
  }

  Pulse parse_pulse_args(Pulse p) {
    expect('(');
    skip_space();
    const SourcePos apos = here();
    bool minus = false;
    if (peek() == '-') {
      minus = true;
      advance();
    }
    const std::string a = word();
    if (a == "x")
      p.axis = minus ? Axis::minus_x : Axis::x;
    else if (a == "y")
      p.axis = minus ? Axis::minus_y : Axis::y;
    else
      throw ParseError("unknown axis '" + std::string(minus ? "-" : "") + a + "'", apos);
    skip_space();
    if (peek() == ',') {
      advance();
      skip_space();
      const SourcePos tpos = here();
      p.target = word();
      if (p.target.empty()) throw ParseError("expected a target name", tpos);
    }
    expect(')');
    return p;
  }

  Repeat parse_repeat() {
    Repeat r;
    r.pos = here();
    advance();  // '['
    r.block = parse_sequence();
    expect(']');
    expect('^');
    skip_space();
    const SourcePos cpos = here();
    if (!std::isdigit(static_cast<unsigned char>(peek()))) throw ParseError("expected repeat count", cpos);
    std::size_t j = i_;
    while (j < text_.size() && std::isdigit(static_cast<unsigned char>(text_[j]))) ++j;
    const auto res = std::from_chars(text_.data() + i_, text_.data() + j, r.count);
    if (res.ec != std::errc()) throw ParseError("repeat count out of range", cpos);
    while (i_ < j) advance();
    if (r.count < 1) throw ParseError("repeat count must be >= 1", cpos);
    return r;
  }
};

}  // namespace detail

inline PulseProgram parse_sequence(std::string_view text, std::string name = {}) {
  PulseProgram p;
  p.items = detail::SequenceParser(text).parse_all();
  p.name = std::move(name);
  return p;
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

/// Text of a named preset. XY8 uses tau at the block edges and 2 tau between
/// pulses; DEER adds a target pi pulse coincident with the refocusing pulse.
inline std::string preset_text(std::string_view name, int n = 1) {
  if (n < 1) throw Error("preset repetition count must be >= 1");
  const std::string reps = std::to_string(n);
  if (name == "hahn") return "pi/2(x) - tau - pi(x) - tau - pi/2(x)";
  if (name == "cpmg") return "pi/2(x) - [tau - pi(y) - tau]^" + reps + " - pi/2(x)";
  if (name == "xy8")
    return "pi/2(x) - [tau - pi(x) - 2*tau - pi(y) - 2*tau - pi(x) - 2*tau - pi(y) - 2*tau - "
           "pi(y) - 2*tau - pi(x) - 2*tau - pi(y) - 2*tau - pi(x) - tau]^" + reps + " - pi/2(x)";
  if (name == "deer") return "pi/2(x) - tau - pi(x) - pi(x, target) - tau - pi/2(x)";
  throw Error("unknown preset '" + std::string(name) + "' (expected hahn, cpmg, xy8 or deer)");
}

inline PulseProgram expand_preset(std::string_view name, int n = 1) {
  std::string label(name);
  if (name == "cpmg" || name == "xy8") label += "-" + std::to_string(n);
  return parse_sequence(preset_text(name, n), label);
}

}  // namespace p1echo
