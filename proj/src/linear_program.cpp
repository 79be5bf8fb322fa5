#include "medge/linear_program.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace medge {

int LinearProgram::add_variable(std::string name, bool is_auxiliary) {
  variable_names.push_back(std::move(name));
  auxiliary.push_back(is_auxiliary ? 1 : 0);
  return variable_count() - 1;
}

void LinearProgram::add_constraint(std::string name, std::vector<Term> terms, RowSense sense,
                                   double rhs) {
  constraints.push_back(Constraint{std::move(name), std::move(terms), sense, rhs});
}

int LinearProgram::decision_variable_count() const {
  return static_cast<int>(std::count(auxiliary.begin(), auxiliary.end(), std::uint8_t{0}));
}

double LinearProgram::evaluate(std::span<const std::uint8_t> assignment) const {
  double value = objective_offset;
  for (const Term& t : objective) {
    if (assignment[t.var]) value += t.coef;
  }
  return value;
}

double LinearProgram::row_activity(const Constraint& row,
                                   std::span<const std::uint8_t> assignment) const {
  double activity = 0.0;
  for (const Term& t : row.terms) {
    if (assignment[t.var]) activity += t.coef;
  }
  return activity;
}

bool LinearProgram::satisfies(const Constraint& row, std::span<const std::uint8_t> assignment,
                              double tol) const {
  const double activity = row_activity(row, assignment);
  const double slack_tol = tol * (1.0 + std::abs(row.rhs));
  switch (row.sense) {
    case RowSense::LessEqual:
      return activity <= row.rhs + slack_tol;
    case RowSense::GreaterEqual:
      return activity >= row.rhs - slack_tol;
    case RowSense::Equal:
      return std::abs(activity - row.rhs) <= slack_tol;
  }
  return false;
}

std::vector<int> LinearProgram::violations(std::span<const std::uint8_t> assignment,
                                           double tol) const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(constraints.size()); ++i) {
    if (!satisfies(constraints[i], assignment, tol)) out.push_back(i);
  }
  return out;
}

void LinearProgram::validate() const {
  const int n = variable_count();
  if (static_cast<int>(auxiliary.size()) != n) {
    throw std::invalid_argument("auxiliary flags do not match variable count");
  }
  auto check_terms = [n](const std::vector<Term>& terms, const std::string& where) {
    for (const Term& t : terms) {
      if (t.var < 0 || t.var >= n) {
        throw std::invalid_argument("unknown variable index " + std::to_string(t.var) + " in " +
                                    where);
      }
      if (!std::isfinite(t.coef)) throw std::invalid_argument("non-finite coefficient in " + where);
    }
  };
  check_terms(objective, "objective");
  for (const Constraint& c : constraints) {
    if (c.terms.empty()) throw std::invalid_argument("constraint " + c.name + " has no terms");
    if (!std::isfinite(c.rhs)) throw std::invalid_argument("non-finite rhs in " + c.name);
    check_terms(c.terms, c.name);
  }
  for (const std::string& name : variable_names) {
    if (name.empty()) throw std::invalid_argument("empty variable name");
  }
  if (!std::isfinite(objective_offset)) throw std::invalid_argument("non-finite objective offset");
}

// ---------------------------------------------------------------------------
// LP text format

namespace {

std::string number(double v) {
  if (v == 0.0) v = 0.0;  // drop negative zero
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_expression(std::ostringstream& out, const LinearProgram& lp,
                      const std::vector<Term>& terms) {
  int on_line = 0;
  bool first = true;
  for (const Term& t : terms) {
    double c = t.coef;
    const bool negative = std::signbit(c) && c != 0.0;
    if (!first) out << (negative ? " - " : " + ");
    else if (negative) out << "- ";
    out << number(std::abs(c)) << ' ' << lp.variable_names[t.var];
    first = false;
    if (++on_line == 8) {
      out << "\n   ";
      on_line = 0;
    }
  }
}

}  // namespace

std::string export_program(const LinearProgram& lp) {
  lp.validate();
  std::ostringstream out;
  out << "\\ 0-1 linear program: " << lp.variable_count() << " variables, "
      << lp.constraints.size() << " constraints\n";
  {
    std::vector<int> aux;
    for (int j = 0; j < lp.variable_count(); ++j) {
      if (lp.auxiliary[j]) aux.push_back(j);
    }
    for (std::size_t k = 0; k < aux.size(); k += 10) {
      out << "\\ auxiliary:";
      for (std::size_t q = k; q < std::min(aux.size(), k + 10); ++q) {
        out << ' ' << lp.variable_names[aux[q]];
      }
      out << '\n';
    }
  }
  out << "Minimize\n obj: ";
  write_expression(out, lp, lp.objective);
  if (lp.objective_offset != 0.0 || lp.objective.empty()) {
    const bool negative = std::signbit(lp.objective_offset) && lp.objective_offset != 0.0;
    if (!lp.objective.empty()) out << (negative ? " - " : " + ");
    else if (negative) out << "- ";
    out << number(std::abs(lp.objective_offset));
  }
  out << "\nSubject To\n";
  for (const Constraint& c : lp.constraints) {
    out << ' ' << c.name << ": ";
    write_expression(out, lp, c.terms);
    switch (c.sense) {
      case RowSense::LessEqual: out << " <= "; break;
      case RowSense::GreaterEqual: out << " >= "; break;
      case RowSense::Equal: out << " = "; break;
    }
    out << number(c.rhs) << '\n';
  }
  out << "Binaries\n";
  for (int j = 0; j < lp.variable_count(); ++j) {
    out << ' ' << lp.variable_names[j];
    if ((j + 1) % 10 == 0 || j + 1 == lp.variable_count()) out << '\n';
  }
  out << "End\n";
  return out.str();
}

namespace {

enum class Section { None, Objective, Constraints, Bounds, Binaries, End };

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

bool section_header(const std::string& line_lower, Section& section) {
  std::string t = line_lower;
  t.erase(0, t.find_first_not_of(" \t"));
  t.erase(t.find_last_not_of(" \t\r") + 1);
  if (t == "minimize" || t == "minimum" || t == "min") section = Section::Objective;
  else if (t == "subject to" || t == "such that" || t == "st" || t == "s.t.")
    section = Section::Constraints;
  else if (t == "bounds" || t == "bound") section = Section::Bounds;
  else if (t == "binaries" || t == "binary" || t == "bin") section = Section::Binaries;
  else if (t == "end") section = Section::End;
  else return false;
  return true;
}

struct Token {
  enum Kind { Name, Number, Plus, Minus, Compare, Colon } kind;
  std::string text;
  double value = 0.0;
};

bool name_char(char ch) {
  return std::isalnum(static_cast<unsigned char>(ch)) || std::string_view("_.[]{}!\"#$%&()/,;?@`'|~").find(ch) != std::string_view::npos;
}

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char ch = s[i];
    if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
    } else if (ch == '+') {
      out.push_back({Token::Plus, "+"});
      ++i;
    } else if (ch == '-') {
      out.push_back({Token::Minus, "-"});
      ++i;
    } else if (ch == ':') {
      out.push_back({Token::Colon, ":"});
      ++i;
    } else if (ch == '<' || ch == '>' || ch == '=') {
      std::string op(1, ch);
      ++i;
      if (i < s.size() && (s[i] == '=' || s[i] == '<' || s[i] == '>')) op += s[i++];
      out.push_back({Token::Compare, op});
    } else if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
      std::size_t j = i;
      while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.')) ++j;
      if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
        if (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) {
          j = k;
          while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
        }
      }
      Token t{Token::Number, std::string(s.substr(i, j - i))};
      t.value = std::stod(t.text);
      out.push_back(t);
      i = j;
    } else if (name_char(ch)) {
      std::size_t j = i;
      while (j < s.size() && name_char(s[j])) ++j;
      out.push_back({Token::Name, std::string(s.substr(i, j - i))});
      i = j;
    } else {
      throw std::invalid_argument(std::string("unexpected character in LP text: ") + ch);
    }
  }
  return out;
}

struct Expression {
  std::vector<Term> terms;
  double constant = 0.0;
};

Expression parse_expression(const std::vector<Token>& toks, std::size_t& pos,
                            const std::unordered_map<std::string, int>& index) {
  Expression expr;
  while (pos < toks.size() && toks[pos].kind != Token::Compare) {
    double sign = 1.0;
    while (pos < toks.size() && (toks[pos].kind == Token::Plus || toks[pos].kind == Token::Minus)) {
      if (toks[pos].kind == Token::Minus) sign = -sign;
      ++pos;
    }
    if (pos >= toks.size()) throw std::invalid_argument("dangling sign in LP expression");
    double coef = 1.0;
    bool have_number = false;
    if (toks[pos].kind == Token::Number) {
      coef = toks[pos].value;
      have_number = true;
      ++pos;
    }
    if (pos < toks.size() && toks[pos].kind == Token::Name) {
      auto it = index.find(toks[pos].text);
      if (it == index.end()) {
        throw std::invalid_argument("variable not declared binary: " + toks[pos].text);
      }
      expr.terms.push_back(Term{it->second, sign * coef});
      ++pos;
    } else if (have_number) {
      expr.constant += sign * coef;
    } else {
      throw std::invalid_argument("malformed LP expression");
    }
  }
  return expr;
}

}  // namespace

LinearProgram parse_program(std::string_view text) {
  // Pass 1: collect lines per section and the declared binaries (variable order).
  std::vector<std::string> objective_lines, constraint_lines, binary_lines;
  std::vector<std::string> auxiliary_names;
  Section section = Section::None;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '\\') {
      const std::string body = line.substr(first + 1);
      const std::string tag = " auxiliary:";
      if (body.rfind(tag, 0) == 0) {
        std::istringstream names(body.substr(tag.size()));
        std::string name;
        while (names >> name) auxiliary_names.push_back(name);
      }
      continue;
    }
    if (section_header(lower(line), section)) continue;
    switch (section) {
      case Section::Objective: objective_lines.push_back(line); break;
      case Section::Constraints: constraint_lines.push_back(line); break;
      case Section::Binaries: binary_lines.push_back(line); break;
      case Section::Bounds:
        throw std::invalid_argument("Bounds section not supported for 0-1 programs");
      case Section::End: break;
      case Section::None: throw std::invalid_argument("LP text outside any section");
    }
  }

  LinearProgram lp;
  std::unordered_map<std::string, int> index;
  for (const std::string& l : binary_lines) {
    std::istringstream names(l);
    std::string name;
    while (names >> name) {
      if (index.contains(name)) throw std::invalid_argument("duplicate binary " + name);
      index.emplace(name, lp.add_variable(name));
    }
  }
  for (const std::string& name : auxiliary_names) {
    auto it = index.find(name);
    if (it == index.end()) throw std::invalid_argument("unknown auxiliary variable " + name);
    lp.auxiliary[it->second] = 1;
  }

  {
    std::string joined;
    for (const std::string& l : objective_lines) joined += l + ' ';
    auto toks = tokenize(joined);
    std::size_t pos = 0;
    if (toks.size() >= 2 && toks[0].kind == Token::Name && toks[1].kind == Token::Colon) pos = 2;
    Expression e = parse_expression(toks, pos, index);
    if (pos != toks.size()) throw std::invalid_argument("comparison in objective");
    lp.objective = std::move(e.terms);
    lp.objective_offset = e.constant;
  }

  // Constraints may continue across lines; a new one starts with "name:".
  std::vector<std::string> rows;
  for (const std::string& l : constraint_lines) {
    auto toks = tokenize(l);
    const bool starts_row = toks.size() >= 2 && toks[0].kind == Token::Name &&
                            toks[1].kind == Token::Colon;
    if (starts_row || rows.empty()) rows.push_back(l);
    else rows.back() += ' ' + l;
  }
  for (const std::string& r : rows) {
    auto toks = tokenize(r);
    std::size_t pos = 0;
    std::string name = "c" + std::to_string(lp.constraints.size());
    if (toks.size() >= 2 && toks[0].kind == Token::Name && toks[1].kind == Token::Colon) {
      name = toks[0].text;
      pos = 2;
    }
    Expression lhs = parse_expression(toks, pos, index);
    if (pos >= toks.size()) throw std::invalid_argument("constraint without comparator: " + name);
    const std::string op = toks[pos++].text;
    RowSense sense;
    if (op == "<=" || op == "<" || op == "=<") sense = RowSense::LessEqual;
    else if (op == ">=" || op == ">" || op == "=>") sense = RowSense::GreaterEqual;
    else if (op == "=") sense = RowSense::Equal;
    else throw std::invalid_argument("bad comparator " + op);
    Expression rhs = parse_expression(toks, pos, index);
    if (!rhs.terms.empty()) throw std::invalid_argument("variables on right-hand side: " + name);
    lp.add_constraint(name, std::move(lhs.terms), sense, rhs.constant - lhs.constant);
  }
  lp.validate();
  return lp;
}

}  // namespace medge
