#include "incodim/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace incodim {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::ParseError, where + ": " + what);
}

void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : keys) ok = ok || it.key() == k;
    if (!ok) fail(where, "unknown key \"" + it.key() + "\"");
  }
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(where, "not finite");
  return v;
}

Vec3 vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) fail(where, "expected an array of 3 numbers");
  return {number(j[0], where + "[0]"), number(j[1], where + "[1]"), number(j[2], where + "[2]")};
}

bool looks_like_vec3(const json& j) { return j.is_array() && j.size() == 3 && j[0].is_number(); }

std::string at(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

}  // namespace

bool BlochPair::is_mub() const {
  return a == Vec3{1.0, 0.0, 0.0} && b == Vec3{0.0, 1.0, 0.0} && wa == 0.0 && wb == 0.0;
}

BinaryQubitObservable BlochPair::first() const { return BinaryQubitObservable(wa, {t * a[0], t * a[1], t * a[2]}); }
BinaryQubitObservable BlochPair::second() const { return BinaryQubitObservable(wb, {t * b[0], t * b[1], t * b[2]}); }

json matrix_to_json(const HermitianOp& h) {
  json rows = json::array();
  for (std::size_t i = 0; i < h.dim(); ++i) {
    json row = json::array();
    for (std::size_t k = 0; k < h.dim(); ++k) row.push_back(json::array({h(i, k).real(), h(i, k).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

HermitianOp matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of rows");
  const std::size_t d = j.size();
  if (d > HermitianOp::kMaxDim) fail(where, "dimension above " + std::to_string(HermitianOp::kMaxDim));
  Matrix m(d);
  for (std::size_t i = 0; i < d; ++i) {
    const json& row = j[i];
    if (!row.is_array() || row.size() != d) fail(at(where, i), "row length differs from the row count");
    for (std::size_t k = 0; k < d; ++k) {
      const json& z = row[k];
      const std::string w = at(at(where, i), k);
      if (z.is_number()) {
        m(i, k) = number(z, w);
      } else {
        if (!z.is_array() || z.size() != 2) fail(w, "expected [re, im]");
        m(i, k) = cplx(number(z[0], w + "[0]"), number(z[1], w + "[1]"));
      }
    }
  }
  try {
    return HermitianOp(m);
  } catch (const Error& e) {
    fail(where, e.what());
  }
}

ProblemInput parse_problem(const json& j) {
  only_keys(j, {"bloch", "observables", "states", "subset"}, "$");
  ProblemInput p;
  const bool has_bloch = j.contains("bloch"), has_obs = j.contains("observables");
  if (has_bloch == has_obs) fail("$", "exactly one of \"bloch\" and \"observables\" is required");

  try {
    if (has_bloch) {
      const json& b = j["bloch"];
      only_keys(b, {"a", "b", "t", "wa", "wb"}, "$.bloch");
      BlochPair bp;
      if (b.contains("a")) bp.a = vec3(b["a"], "$.bloch.a");
      if (b.contains("b")) bp.b = vec3(b["b"], "$.bloch.b");
      if (b.contains("t")) bp.t = number(b["t"], "$.bloch.t");
      if (b.contains("wa")) bp.wa = number(b["wa"], "$.bloch.wa");
      if (b.contains("wb")) bp.wb = number(b["wb"], "$.bloch.wb");
      if (bp.t < 0.0) fail("$.bloch.t", "must be nonnegative");
      for (auto [name, v] : {std::pair{"a", bp.a}, std::pair{"b", bp.b}}) {
        const double r = bp.t * norm(v);
        if (r > 1.0 + 1e-12) {
          std::ostringstream os;
          os << "Bloch vector length " << r << " exceeds 1";
          fail(std::string("$.bloch.") + name, os.str());
        }
      }
      try {
        p.observables = {bp.first().to_observable(), bp.second().to_observable()};
      } catch (const Error& e) {
        fail("$.bloch", e.what());
      }
      p.bloch = bp;
    } else {
      const json& obs = j["observables"];
      if (!obs.is_array() || obs.empty()) fail("$.observables", "expected a non-empty array");
      for (std::size_t o = 0; o < obs.size(); ++o) {
        const std::string w = at("$.observables", o);
        if (!obs[o].is_array() || obs[o].empty()) fail(w, "expected an array of effect matrices");
        std::vector<HermitianOp> ops;
        for (std::size_t x = 0; x < obs[o].size(); ++x) ops.push_back(matrix_from_json(obs[o][x], at(w, x)));
        try {
          p.observables.push_back(Observable::from_ops(ops, 1e-10));
        } catch (const Error& e) {
          fail(w, e.what());
        }
      }
      const std::size_t d = p.observables[0].dim();
      for (std::size_t o = 1; o < p.observables.size(); ++o)
        if (p.observables[o].dim() != d) fail(at("$.observables", o), "dimension differs from observable 0");
    }

    const std::size_t d = p.observables[0].dim();
    if (j.contains("states")) {
      const json& st = j["states"];
      if (!st.is_array() || st.empty()) fail("$.states", "expected a non-empty array");
      std::vector<State> states;
      for (std::size_t l = 0; l < st.size(); ++l) {
        const std::string w = at("$.states", l);
        HermitianOp rho;
        if (looks_like_vec3(st[l])) {
          if (d != 2) fail(w, "Bloch-vector states need qubit observables");
          const Vec3 r = vec3(st[l], w);
          if (norm(r) > 1.0 + 1e-12) fail(w, "Bloch vector outside the unit ball");
          rho = HermitianOp::qubit(1.0, r);
        } else {
          rho = matrix_from_json(st[l], w);
        }
        if (rho.dim() != d) fail(w, "dimension differs from the observables");
        try {
          states.emplace_back(rho, 1e-10);
        } catch (const Error& e) {
          fail(w, e.what());
        }
      }
      p.states = std::move(states);
    }
    if (j.contains("subset")) {
      if (j["subset"] != "pq_detector") fail("$.subset", "only \"pq_detector\" is recognised");
      if (p.states) fail("$.subset", "give either \"states\" or \"subset\"");
      p.pq_subset = true;
    }
  } catch (const json::exception& e) {
    fail("$", e.what());
  }
  return p;
}

ProblemInput parse_problem_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is 1-based; translate to line and column
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << "line " << line << ", column " << col << ": invalid JSON";
    throw Error(ErrorCode::ParseError, os.str());
  }
  return parse_problem(j);
}

ProblemInput load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem_text(ss.str());
}

json problem_to_json(const ProblemInput& p) {
  json j;
  if (p.bloch) {
    j["bloch"] = {{"a", p.bloch->a}, {"b", p.bloch->b}, {"t", p.bloch->t}, {"wa", p.bloch->wa}, {"wb", p.bloch->wb}};
  } else {
    json obs = json::array();
    for (const auto& o : p.observables) {
      json effects = json::array();
      for (const auto& e : o.effects()) effects.push_back(matrix_to_json(e.op()));
      obs.push_back(std::move(effects));
    }
    j["observables"] = std::move(obs);
  }
  if (p.states) {
    json st = json::array();
    for (const auto& s : *p.states) st.push_back(matrix_to_json(s.op()));
    j["states"] = std::move(st);
  }
  if (p.pq_subset) j["subset"] = "pq_detector";
  return j;
}

json witness_to_json(const StateFormWitness& w) {
  json coeffs = json::array(), states = json::array();
  for (std::size_t j = 0; j < w.coeffs.size(); ++j) {
    coeffs.push_back(w.coeffs[j]);
    json row = json::array();
    for (const auto& s : w.states[j]) row.push_back(matrix_to_json(s.op()));
    states.push_back(std::move(row));
  }
  return {{"delta", w.delta}, {"coeffs", std::move(coeffs)}, {"states", std::move(states)}};
}

StateFormWitness witness_from_json(const json& j) {
  only_keys(j, {"delta", "coeffs", "states"}, "$");
  for (const char* k : {"delta", "coeffs", "states"})
    if (!j.contains(k)) fail("$", std::string("missing \"") + k + "\"");
  StateFormWitness w;
  w.delta = number(j["delta"], "$.delta");
  const json& c = j["coeffs"];
  const json& s = j["states"];
  if (!c.is_array() || !s.is_array() || c.size() != s.size()) fail("$", "coeffs and states differ in shape");
  for (std::size_t a = 0; a < c.size(); ++a) {
    if (!c[a].is_array() || !s[a].is_array() || c[a].size() != s[a].size()) fail(at("$.coeffs", a), "shape differs from states");
    w.coeffs.emplace_back();
    w.states.emplace_back();
    for (std::size_t x = 0; x < c[a].size(); ++x) {
      w.coeffs.back().push_back(number(c[a][x], at(at("$.coeffs", a), x)));
      const std::string where = at(at("$.states", a), x);
      try {
        w.states.back().emplace_back(matrix_from_json(s[a][x], where), 1e-9);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::ParseError) throw;
        fail(where, e.what());
      }
    }
  }
  return w;
}

json tolerances_to_json(const SolverOptions& o) {
  return {{"tol_marginal", o.tol_marginal}, {"tol_psd", o.tol_psd}, {"tol_gap", o.tol_gap}, {"max_iter", o.max_iter}};
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "t,phi0,psi0,xi1_min,xi1_max,xi2_min,xi2_max,Z,compatible\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%s\n", r.t, r.phi0, r.psi0, r.xi1_min,
                  r.xi1_max, r.xi2_min, r.xi2_max, r.z, r.compatible ? "true" : "false");
    os << buf;
  }
}

json sweep_to_json(const std::vector<SweepRow>& rows) {
  json out = json::array();
  for (const auto& r : rows)
    out.push_back({{"t", r.t}, {"phi0", r.phi0}, {"psi0", r.psi0}, {"xi1_min", r.xi1_min}, {"xi1_max", r.xi1_max},
                   {"xi2_min", r.xi2_min}, {"xi2_max", r.xi2_max}, {"Z", r.z}, {"compatible", r.compatible}});
  return out;
}

}  // namespace incodim
