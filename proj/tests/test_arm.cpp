#include <doctest.h>

#include <cmath>

#include "ledgerml/arm.hpp"
#include "ledgerml/error.hpp"
#include "support/gen.hpp"
#include "support/oracle.hpp"

using namespace ledgerml;
using namespace ledgerml::arm;

namespace {

std::vector<ItemTransaction> d5() {
  return {make_transaction(1, {"a", "b", "c"}), make_transaction(2, {"a", "b"}), make_transaction(3, {"a", "c"}),
          make_transaction(4, {"b", "c"}), make_transaction(5, {"a", "b", "c"})};
}

MiningParams params(double s, double c, std::size_t k = 3) {
  MiningParams p;
  p.min_support = s;
  p.min_confidence = c;
  p.max_rule_items = k;
  return p;
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::Internal;
}

}  // namespace

TEST_CASE("group_transactions") {
  std::vector<ledger::Record> fig3{{0, "actiq"}, {0, "meperidine"}, {0, "fentora"},  {0, "methadone"},
                                   {0, "lorcet"}, {0, "acetaminophen"}, {0, "duragesic"}, {1, "morphine"},
                                   {1, "hysingla"}, {1, "actiq"}, {1, "percocet"}, {1, "oxycodone"},
                                   {1, "fentora"}, {1, "meperidine"}};
  const auto txns = group_transactions(fig3);
  REQUIRE(txns.size() == 2);
  CHECK(txns[0].items.size() == 7);
  CHECK(txns[1].items.size() == 7);
  CHECK(txns[0].items.front() == "acetaminophen");
  CHECK(group_transactions({}).empty());

  std::vector<ledger::Record> dup{{4, "x"}, {2, "y"}, {4, "x"}};
  const auto d = group_transactions(dup);
  REQUIRE(d.size() == 2);
  CHECK(d[0].patient_id == 2);
  CHECK(d[1].items == std::vector<Item>{"x"});
}

TEST_CASE("D5 frequent itemsets") {
  const auto txns = d5();
  const auto f = mine_frequent_itemsets(txns, params(0.6, 0.5));
  const std::vector<Itemset> want{{{"a"}, 4}, {{"a", "b"}, 3}, {{"a", "c"}, 3}, {{"b"}, 4}, {{"b", "c"}, 3}, {{"c"}, 4}};
  auto sorted = f;
  std::sort(sorted.begin(), sorted.end(), [](auto& x, auto& y) { return x.items < y.items; });
  CHECK(sorted == want);

  CHECK(mine_frequent_itemsets(txns, params(1.0, 0.5)).empty());
  const std::vector<ItemTransaction> one{make_transaction(0, {"x"})};
  CHECK(mine_frequent_itemsets(one, params(0.5, 0.5)) == std::vector<Itemset>{{{"x"}, 1}});
  CHECK(code_of([] { mine_frequent_itemsets({}, params(0.5, 0.5)); }) == Errc::EmptyInput);
}

TEST_CASE("D5 rules") {
  const auto txns = d5();
  const auto rules = mine_rules(txns, params(0.6, 0.75));
  REQUIRE(rules.size() == 6);
  std::vector<std::string> texts;
  for (const auto& r : rules) {
    texts.push_back(rule_text(r));
    CHECK(r.count == 3);
    CHECK(r.support == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(r.confidence == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(r.lift == doctest::Approx(0.9375).epsilon(1e-12));
  }
  CHECK(texts == std::vector<std::string>{"a ==> b", "a ==> c", "b ==> a", "b ==> c", "c ==> a", "c ==> b"});
  CHECK(mine_rules(txns, params(0.6, 1.0)).empty());
  CHECK(oracle::rules_match(rules, oracle::brute_force_rules(txns, params(0.6, 0.75))));
}

TEST_CASE("reference rule row arithmetic") {
  // count 202 of 1001 transactions at 78.90625% confidence
  const auto r = make_rule({{"actiq", "fentora"}, 256}, {{"meperidine"}, 300}, 202, 1001);
  CHECK(std::abs(100.0 * r.support - 100.0 * 202.0 / 1001.0) < 1e-6);
  CHECK(std::abs(100.0 * r.support - 20.17982018) < 1e-6);
  CHECK(100.0 * r.confidence == 78.90625);
  CHECK(202.0 / 0.7890625 == 256.0);
  CHECK(format_fixed8(100.0 * r.confidence) == "78.90625000");
  CHECK(rule_text(r) == "actiq & fentora ==> meperidine");
}

TEST_CASE("params validation") {
  CHECK_NOTHROW(params(0.2, 0.7).validate());
  CHECK(code_of([] { params(0.0, 0.7).validate(); }) == Errc::InvalidParams);
  CHECK(code_of([] { params(0.2, 1.5).validate(); }) == Errc::InvalidParams);
  CHECK(code_of([] { params(0.2, 0.7, 1).validate(); }) == Errc::InvalidParams);
}

TEST_CASE("generate_rules needs every subset") {
  const std::vector<Itemset> partial{{{"a"}, 4}, {{"a", "b"}, 3}};
  CHECK(code_of([&] { generate_rules(partial, 5, params(0.1, 0.1)); }) == Errc::MissingSubset);
}

TEST_CASE("candidate generation joins on prefix and prunes") {
  const std::vector<ItemIds> f2{{0, 1}, {0, 2}, {0, 3}, {1, 2}};
  // {0,1,3} and {0,2,3} lose a subset; {0,1,2} survives
  CHECK(generate_candidates(f2) == std::vector<ItemIds>{{0, 1, 2}});
  CHECK(singleton_candidates(3) == std::vector<ItemIds>{{0}, {1}, {2}});
}

TEST_CASE("score_rules") {
  const auto ab = make_rule({{"a"}, 1}, {{"b"}, 1}, 1, 2);
  const std::vector<ItemTransaction> t{make_transaction(0, {"a"}), make_transaction(1, {"a", "b"})};
  const auto s = score_rules(std::vector{ab}, t);
  REQUIRE(s[0].confidence);
  CHECK(*s[0].confidence == 0.5);
  CHECK(s[0].lhs_hits == 2);
  const auto xy = make_rule({{"x"}, 1}, {{"y"}, 1}, 1, 2);
  CHECK_FALSE(score_rules(std::vector{xy}, t)[0].confidence);

  const auto txns = d5();
  const auto rules = mine_rules(txns, params(0.4, 0.5));
  const auto scores = score_rules(rules, txns);
  for (std::size_t i = 0; i < rules.size(); ++i) CHECK(*scores[i].confidence == rules[i].confidence);
}

TEST_CASE("rule table CSV layout") {
  const std::vector<AssociationRule> rules{make_rule({{"lorcet"}, 10}, {{"fentora"}, 12}, 8, 40),
                                           make_rule({{"actiq", "fentora"}, 256}, {{"meperidine"}, 300}, 202, 1001)};
  const auto csv = rule_table_csv(rules);
  CHECK(csv ==
        "Size of Rule LHS,Size of Rule RHS,Transaction Count,Support(%),Confidence(%),Lift,Item1,Item2,Item3,Rule\n"
        "1,1,8,20.00000000,80.00000000,2.66666667,lorcet,fentora,,lorcet ==> fentora\n"
        "2,1,202,20.17982018,78.90625000,2.63283854,actiq,fentora,meperidine,actiq & fentora ==> meperidine\n");
  const std::vector<AssociationRule> wide{make_rule({{"a", "b"}, 2}, {{"c", "d"}, 2}, 2, 2)};
  CHECK(rule_table_csv(wide).starts_with(
      "Size of Rule LHS,Size of Rule RHS,Transaction Count,Support(%),Confidence(%),Lift,Item1,Item2,Item3,Item4,Rule\n"
      "2,2,2,100.00000000,100.00000000,1.00000000,a,b,c,d,a & b ==> c & d\n"));
}

TEST_CASE("oracle guard") {
  std::vector<Item> many;
  for (std::size_t i = 0; i < 21; ++i) many.push_back(gen::item_name(i));
  const std::vector<ItemTransaction> t{make_transaction(0, many)};
  CHECK(code_of([&] { oracle::brute_force_rules(t, params(0.5, 0.5)); }) == Errc::TooLarge);
}

TEST_CASE("property: Apriori equals the brute-force oracle") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    gen::Rng rng(seed);
    const auto txns = gen::transactions(rng, 2 + gen::below(rng, 9), 1 + gen::below(rng, 100));
    const auto p = gen::params(rng);
    CAPTURE(seed);
    CHECK(oracle::rules_match(mine_rules(txns, p), oracle::brute_force_rules(txns, p)));
  }
}

TEST_CASE("property: downward closure and arithmetic consistency") {
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    gen::Rng rng(seed);
    const auto txns = gen::transactions(rng, 8, 80);
    const auto p = gen::params(rng);
    const auto freq = mine_frequent_itemsets(txns, p);
    std::map<std::vector<Item>, std::uint64_t> by_items;
    for (const auto& f : freq) by_items[f.items] = f.count;
    for (const auto& f : freq) {
      CHECK(f.count == oracle::recount(txns, f.items));
      for (std::size_t drop = 0; drop < f.items.size() && f.items.size() > 1; ++drop) {
        auto sub = f.items;
        sub.erase(sub.begin() + static_cast<std::ptrdiff_t>(drop));
        REQUIRE(by_items.contains(sub));
        CHECK(by_items[sub] >= f.count);
      }
    }
    const double n = static_cast<double>(txns.size());
    for (const auto& r : mine_rules(txns, p)) {
      CHECK(std::abs(r.support * n - static_cast<double>(r.count)) < 1e-9);
      CHECK(oracle::rel_close(r.confidence, static_cast<double>(r.count) / static_cast<double>(r.lhs.count)));
      CHECK(oracle::rel_close(r.lift * static_cast<double>(r.rhs.count) / n, r.confidence));
      CHECK(r.support >= p.min_support);
      CHECK(r.confidence >= p.min_confidence);
      CHECK(r.size() <= p.max_rule_items);
    }
  }
}

TEST_CASE("property: raising thresholds never adds a rule") {
  for (std::uint64_t seed = 200; seed < 230; ++seed) {
    gen::Rng rng(seed);
    const auto txns = gen::transactions(rng, 8, 60);
    auto p = gen::params(rng);
    const auto base = mine_rules(txns, p);
    std::set<std::string> base_texts;
    for (const auto& r : base) base_texts.insert(rule_text(r));
    p.min_support = std::min(1.0, p.min_support + gen::between(rng, 0.0, 0.2));
    p.min_confidence = std::min(1.0, p.min_confidence + gen::between(rng, 0.0, 0.2));
    for (const auto& r : mine_rules(txns, p)) CHECK(base_texts.contains(rule_text(r)));
  }
}
