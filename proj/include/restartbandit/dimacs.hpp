#pragma once

// DIMACS CNF reading and writing.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "restartbandit/core.hpp"
#include "restartbandit/random.hpp"

namespace restartbandit {

struct CnfFormula {
    int num_vars = 0;
    std::vector<std::vector<int>> clauses;

    friend bool operator==(const CnfFormula&, const CnfFormula&) = default;

    /// True iff `assignment` (indexed 1..num_vars; index 0 unused) satisfies every clause.
    bool satisfied_by(const std::vector<bool>& assignment) const {
        for (const auto& c : clauses) {
            const bool sat = std::any_of(c.begin(), c.end(), [&](int lit) {
                return assignment[static_cast<std::size_t>(std::abs(lit))] == (lit > 0);
            });
            if (!sat) return false;
        }
        return true;
    }
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& msg)
        : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Accepts 'c' comment lines, one 'p cnf V C' header and zero-terminated
/// clauses that may span lines. A line starting with '%' ends the clause
/// section (SATLIB convention); anything after it is ignored. Duplicate
/// literals inside a clause are dropped.
inline CnfFormula parse_dimacs(std::istream& in) {
    CnfFormula f;
    bool have_header = false;
    long long declared = 0;
    std::vector<int> clause;
    std::size_t clause_start = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const char lead = line[first];
        if (lead == 'c') continue;
        if (lead == '%') break;
        if (lead == 'p') {
            if (have_header) throw ParseError(lineno, "duplicate problem line");
            std::istringstream ss(line.substr(first));
            std::string p, fmt, extra;
            long long v = -1, c = -1;
            if (!(ss >> p >> fmt >> v >> c) || p != "p" || fmt != "cnf" || v < 0 || c < 0 || (ss >> extra)) {
                throw ParseError(lineno, "malformed problem line, expected 'p cnf <vars> <clauses>'");
            }
            f.num_vars = static_cast<int>(v);
            declared = c;
            have_header = true;
            continue;
        }
        if (!have_header) throw ParseError(lineno, "clause before 'p cnf' header");
        std::istringstream ss(line);
        std::string tok;
        while (ss >> tok) {
            char* end = nullptr;
            const long long lit = std::strtoll(tok.c_str(), &end, 10);
            if (end == tok.c_str() || *end != '\0') throw ParseError(lineno, "invalid literal '" + tok + "'");
            if (lit == 0) {
                if (clause.empty()) throw ParseError(lineno, "empty clause");
                f.clauses.push_back(std::move(clause));
                clause.clear();
                continue;
            }
            if (std::llabs(lit) > f.num_vars) {
                throw ParseError(lineno, "literal " + tok + " out of range 1.." + std::to_string(f.num_vars));
            }
            if (clause.empty()) clause_start = lineno;
            const int l = static_cast<int>(lit);
            if (std::find(clause.begin(), clause.end(), l) == clause.end()) clause.push_back(l);
        }
    }
    if (!have_header) throw ParseError(lineno, "missing 'p cnf' header");
    if (!clause.empty()) throw ParseError(clause_start, "clause not terminated by 0");
    if (static_cast<long long>(f.clauses.size()) != declared) {
        throw ParseError(lineno, "header declares " + std::to_string(declared) + " clauses, found " +
                                     std::to_string(f.clauses.size()));
    }
    return f;
}

inline CnfFormula parse_dimacs(const std::string& text) {
    std::istringstream in(text);
    return parse_dimacs(in);
}

inline std::string serialize_dimacs(const CnfFormula& f) {
    std::ostringstream os;
    os << "p cnf " << f.num_vars << ' ' << f.clauses.size() << '\n';
    for (const auto& c : f.clauses) {
        for (int lit : c) os << lit << ' ';
        os << "0\n";
    }
    return os.str();
}

/// Uniform random 3-SAT: each clause has 3 distinct variables drawn without
/// replacement and independent uniform signs.
inline CnfFormula generate_random_3sat(int n_vars, int n_clauses, std::uint64_t seed) {
    if (n_vars < 3) throw InvalidArgument("random 3-SAT needs at least 3 variables");
    if (n_clauses < 0) throw InvalidArgument("clause count must be >= 0");
    RandomStream rng(seed);
    CnfFormula f;
    f.num_vars = n_vars;
    f.clauses.reserve(static_cast<std::size_t>(n_clauses));
    for (int i = 0; i < n_clauses; ++i) {
        std::vector<int> c;
        while (c.size() < 3) {
            const int v = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_vars))) + 1;
            if (std::find_if(c.begin(), c.end(), [v](int l) { return std::abs(l) == v; }) != c.end()) continue;
            c.push_back(rng.bernoulli(0.5) ? v : -v);
        }
        f.clauses.push_back(std::move(c));
    }
    return f;
}

} // namespace restartbandit
