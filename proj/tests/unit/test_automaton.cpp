#include "ldbsm/automaton.hpp"
#include "ldbsm/error.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace ldbsm;

namespace {

Ldba random_automaton(std::mt19937_64& g) {
  Ldba a;
  std::size_t n = 1 + g() % 8;
  for (std::size_t i = 0; i < n; ++i) a.states.push_back("s" + std::to_string(i));
  a.atoms = {"a"};
  a.initial = g() % n;
  for (std::size_t q = 0; q < n; ++q)
    if (g() % 4 == 0) a.accepting.insert(q);
  for (std::size_t q = 0; q < n; ++q)
    for (Letter l = 0; l < 2; ++l)
      for (std::size_t t = 0; t < n; ++t)
        if (g() % (n + 1) == 0) a.transitions[{q, l}].insert(t);
  return a;
}

} // namespace

TEST_CASE("the GF a automaton is fully deterministic") {
  auto a = load_automaton_file(oracle::data("automata/GF_a.ldba"));
  CHECK(a.size() == 2);
  CHECK(a.atoms == std::vector<std::string>{"a"});
  auto r = validate(a);
  CHECK(r.valid);
  CHECK(r.deterministic == std::set<StateId>{0, 1});
  CHECK(r.nondeterministic.empty());
  CHECK(rejecting_states(a).empty());
  CHECK(a.total());
}

TEST_CASE("FG a has one nondeterministic state and a rejecting sink") {
  auto a = load_automaton_file(oracle::data("automata/FG_a.ldba"));
  auto r = validate(a);
  CHECK(r.valid);
  CHECK(r.nondeterministic == std::set<StateId>{0});
  CHECK(r.deterministic == std::set<StateId>{1, 2});
  CHECK(rejecting_states(a) == std::set<StateId>{2});
  CHECK(a.successors(0, 1) == std::set<StateId>{0, 1});
}

TEST_CASE("violations of limit determinism") {
  auto bad = parse_automaton("atoms: a\nstates: p, r\ninit: p\naccepting: r\ndeterministic: r\n"
                             "p --~--> r\np --a--> r\nr --a--> r\nr --a--> p\nr --~--> r\n");
  auto rep = validate(bad);
  CHECK_FALSE(rep.valid);
  bool found = false;
  for (const auto& v : rep.entries) found = found || v.kind == Violation::Kind::Nondeterministic;
  CHECK(found);

  auto leaves = parse_automaton("atoms: a\nstates: p, r\ninit: p\naccepting: r\ndeterministic: r\n"
                                "p --~--> p\np --a--> r\nr --a--> r\nr --~--> p\n");
  CHECK_FALSE(validate(leaves).valid);
}

TEST_CASE("empty accepting set rejects everywhere") {
  auto a = parse_automaton("atoms: a\nstates: p, r, s\ninit: p\naccepting:\np --a--> r\nr --~--> s\n");
  CHECK(rejecting_states(a) == std::set<StateId>{0, 1, 2});
}

TEST_CASE("completion adds a rejecting sink") {
  auto a = parse_automaton("atoms: a\nstates: p, r\ninit: p\naccepting: r\np --a--> r\nr --a--> r\n");
  CHECK_FALSE(a.total());
  auto c = a.completed();
  CHECK(c.total());
  CHECK(c.size() == 3);
  CHECK(rejecting_states(c) == std::set<StateId>{2});
  CHECK(a.completed().completed().size() == 3);
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_automaton("atoms: a\nstates: p\naccepting: p\n"), ParseError);
  CHECK_THROWS_AS(parse_automaton("atoms: a\nstates: p\ninit: p\np --c--> p\n"), ParseError);
  CHECK_THROWS_AS(parse_automaton("atoms: a\nstates: p\ninit: p\np --a--> z\n"), ParseError);
}

TEST_CASE("rendering matches the golden file and round-trips") {
  auto a = load_automaton_file(oracle::data("automata/FG_a.ldba"));
  auto text = render_automaton(a);
  CHECK(text == testutil::slurp(std::filesystem::path(LDBSM_GOLDEN_DIR) / "FG_a.rendered.ldba"));
  auto b = parse_automaton(text);
  CHECK(b.states == a.states);
  CHECK(b.transitions == a.transitions);
  CHECK(b.accepting == a.accepting);
}

TEST_CASE("rejecting states agree with the closure oracle") {
  auto g = stream_engine(41, 0);
  for (int i = 0; i < 200; ++i) {
    auto a = random_automaton(g);
    CHECK(rejecting_states(a) == oracle::rejecting(a));
    auto c = a.completed();
    CHECK(rejecting_states(c) == oracle::rejecting(c));
  }
}

TEST_CASE("deterministic part is closed") {
  auto g = stream_engine(42, 0);
  for (int i = 0; i < 200; ++i) {
    auto a = random_automaton(g).completed();
    auto r = validate(a);
    if (!r.valid) continue;
    for (StateId q : r.deterministic)
      for (Letter l = 0; l < a.letter_count(); ++l) {
        CHECK(a.successors(q, l).size() == 1);
        for (StateId t : a.successors(q, l)) CHECK(r.deterministic.count(t) == 1);
      }
  }
}

TEST_CASE("atoms resolve against the model") {
  auto m = load_model_file(oracle::data("models/random_walk.yaml"));
  auto a = load_automaton_file(oracle::data("automata/F_a_and_F_b.ldba"));
  auto preds = atom_predicates(a, m);
  REQUIRE(preds.size() == 2);
  CHECK(preds[1].name == "b");
  auto bad = parse_automaton("atoms: c\nstates: p\ninit: p\naccepting: p\np --~--> p\np --c--> p\n");
  CHECK_THROWS_AS(atom_predicates(bad, m), ModelError);
}
