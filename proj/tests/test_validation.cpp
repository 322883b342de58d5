#include <set>

#include "doctest.h"
#include "labelerr/error.hpp"
#include "labelerr/validation.hpp"
#include "support.hpp"

using namespace labelerr;

namespace {

std::vector<Choice> decode(int code, int w) {
  std::vector<Choice> v;
  for (int k = 0; k < w; ++k) {
    v.push_back(static_cast<Choice>(code % 4));
    code /= 4;
  }
  return v;
}

std::vector<Judgment> judgments_for(const std::string& id, const std::vector<Choice>& choices) {
  std::vector<Judgment> out;
  for (std::size_t k = 0; k < choices.size(); ++k) {
    out.push_back({id, "w" + std::to_string(k), choices[k], "2026-01-01T00:00:00Z"});
  }
  return out;
}

std::int64_t cell(const std::string& s) { return std::stoll(s); }

}  // namespace

TEST_CASE("every one of the 1024 five-vote vectors gets the defined category") {
  for (int a = 3; a <= 5; ++a) {
    const ValidationPolicy policy{5, a};
    for (int code = 0; code < 1024; ++code) {
      const auto votes = decode(code, 5);
      CAPTURE(code);
      CHECK(categorize(votes, policy) == support::oracle_category(votes, a));
    }
  }
}

TEST_CASE("raising the agreement threshold only shrinks the non-error set") {
  std::set<int> prev;
  for (int a = 5; a >= 3; --a) {
    std::set<int> cur;
    for (int code = 0; code < 1024; ++code) {
      if (categorize(decode(code, 5), ValidationPolicy{5, a}) == Category::NonError) cur.insert(code);
    }
    CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
    prev = cur;
  }
}

TEST_CASE("spot checks of the decision rules") {
  using C = Choice;
  const ValidationPolicy p{5, 3};
  CHECK(categorize(std::vector{C::Given, C::Given, C::Given, C::Alternative, C::Alternative}, p) == Category::NonError);
  CHECK(categorize(std::vector{C::Given, C::Given, C::Alternative, C::Alternative, C::Alternative}, p) == Category::Correctable);
  CHECK(categorize(std::vector{C::Both, C::Both, C::Both, C::Given, C::Given}, p) == Category::MultiLabel);
  CHECK(categorize(std::vector{C::Neither, C::Neither, C::Neither, C::Both, C::Given}, p) == Category::Neither);
  CHECK(categorize(std::vector{C::Given, C::Given, C::Both, C::Alternative, C::Neither}, p) == Category::NonAgreement);
  // Both votes do not count toward the given label.
  CHECK(categorize(std::vector{C::Given, C::Given, C::Both, C::Both, C::Neither}, p) == Category::NonAgreement);
  CHECK(categorize(std::vector{C::Given, C::Given, C::Given, C::Alternative, C::Alternative}, ValidationPolicy{5, 4}) ==
        Category::NonAgreement);
  CHECK(ValidationPolicy{5, 3}.majority() == 3);
  CHECK(ValidationPolicy{4, 3}.majority() == 3);
  CHECK(ValidationPolicy{3, 2}.majority() == 2);
}

TEST_CASE("aggregation of one candidate") {
  using C = Choice;
  const ValidationPolicy p{5, 3};
  const auto v = aggregate_candidate(judgments_for("ex1", {C::Alternative, C::Alternative, C::Alternative, C::Given, C::Both}), p, 7);
  CHECK(v.candidate_id == "ex1");
  CHECK(v.is_error);
  CHECK(v.category == Category::Correctable);
  CHECK(v.corrected_label == 7);

  const auto ok = aggregate_candidate(judgments_for("ex2", {C::Given, C::Given, C::Given, C::Given, C::Both}), p, 7);
  CHECK_FALSE(ok.is_error);
  CHECK_FALSE(ok.corrected_label.has_value());

  try {
    aggregate_candidate(judgments_for("ex3", {C::Given, C::Given}), p, 0);
    FAIL("expected WrongJudgmentCount");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::WrongJudgmentCount);
  }
  auto dup = judgments_for("ex4", {C::Given, C::Given, C::Given, C::Given, C::Given});
  dup[4].worker_id = dup[0].worker_id;
  try {
    aggregate_candidate(dup, p, 0);
    FAIL("expected DuplicateJudgment");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DuplicateJudgment);
  }
}

TEST_CASE("policy and choice parsing") {
  CHECK_THROWS_AS(ValidationPolicy({5, 6}).validate(), Error);
  CHECK_THROWS_AS(ValidationPolicy({0, 0}).validate(), Error);
  CHECK(parse_choice("ALTERNATIVE") == Choice::Alternative);
  CHECK(parse_choice(to_string(Choice::Both)) == Choice::Both);
  try {
    parse_choice("maybe");
    FAIL("expected MalformedChoice");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MalformedChoice);
  }
  for (auto c : {Category::NonError, Category::Correctable, Category::MultiLabel, Category::Neither,
                 Category::NonAgreement}) {
    CHECK(parse_category(to_string(c)) == c);
  }
}

TEST_CASE("error-rate arithmetic over the published dataset table") {
  const auto rows = support::read_fixture("error_rates.csv");
  REQUIRE(rows.size() == 10);
  for (const auto& r : rows) {
    CAPTURE(r[0]);
    const auto size = cell(r[1]), guessed = cell(r[2]), checked = cell(r[3]), validated = cell(r[4]);
    std::int64_t errors = validated;
    if (r[5] != "-") {
      errors = estimate_total_errors(validated, checked, guessed);
      CHECK(errors == cell(r[5]));
    }
    const double pct = percent_error(errors, size);
    if (r[0] == "20news") {
      // 82 / 7532 is 1.0887%; the table prints 1.11.
      CHECK(pct == 1.09);
    } else {
      CHECK(pct == doctest::Approx(std::stod(r[6])).epsilon(1e-12));
    }
  }
}

TEST_CASE("exact rounding does not drift on large counts") {
  CHECK(estimate_total_errors(1, 2, 1) == 1);  // 0.5 rounds up
  CHECK(estimate_total_errors(1, 3, 1) == 0);
  CHECK(estimate_total_errors(1, 1, 4'000'000'000'000LL) == 4'000'000'000'000LL);
  CHECK(percent_error(1, 8) == 12.5);
  CHECK(percent_error(1, 80000) == 0.0);  // 0.00125 -> 0.00
  CHECK(percent_error(1, 40000) == 0.0);  // 0.0025 -> 0.00
  CHECK(percent_error(1, 20000) == 0.01);  // 0.005 -> 0.01
  CHECK_THROWS_AS(estimate_total_errors(3, 2, 10), Error);
  CHECK_THROWS_AS(percent_error(1, 0), Error);
}

TEST_CASE("session summary reproduces a category row and its error rate") {
  const auto rows = support::read_fixture("error_categories.csv");
  const auto& cifar = rows[1];
  REQUIRE(cifar[0] == "CIFAR-10");
  std::vector<Verdict> verdicts;
  auto add = [&](Category c, std::int64_t count) {
    for (std::int64_t k = 0; k < count; ++k) {
      verdicts.push_back({"c" + std::to_string(verdicts.size()), c != Category::NonError, c, std::nullopt});
    }
  };
  add(Category::NonError, cell(cifar[1]));
  add(Category::NonAgreement, cell(cifar[3]));
  add(Category::Correctable, cell(cifar[4]));
  add(Category::MultiLabel, cell(cifar[5]));
  add(Category::Neither, cell(cifar[6]));
  const auto s = summarize_session(verdicts, ValidationPolicy{}, DatasetMeta{"CIFAR-10", 10000, std::nullopt});
  CHECK(s.checked == 275);
  CHECK(s.guessed == 275);
  CHECK(s.categories.errors == cell(cifar[2]));
  CHECK(s.validated == 54);
  CHECK(*s.categories.correctable == 18);
  CHECK_FALSE(s.estimated_total.has_value());
  CHECK(*s.percent_error == 0.54);

  const auto sampled = summarize_session(verdicts, ValidationPolicy{}, DatasetMeta{"x", 100000, 550});
  CHECK(*sampled.estimated_total == 108);
  CHECK(*sampled.percent_error == 0.11);
}

TEST_CASE("category rows are internally consistent") {
  for (const auto& r : support::read_fixture("error_categories.csv")) {
    if (r[3] == "-") continue;
    std::int64_t parts = 0;
    for (int k = 3; k <= 6; ++k) parts += r[k] == "-" ? 0 : cell(r[k]);
    CAPTURE(r[0]);
    CHECK(parts == cell(r[2]));
  }
}

TEST_CASE("headline figures: average error rate and overall validation rate") {
  double pct_sum = 0.0;
  std::int64_t validated = 0, checked = 0;
  const auto rows = support::read_fixture("error_rates.csv");
  for (const auto& r : rows) {
    const auto errors = r[5] == "-" ? cell(r[4]) : estimate_total_errors(cell(r[4]), cell(r[3]), cell(r[2]));
    pct_sum += percent_error(errors, cell(r[1]));
    validated += cell(r[4]);
    checked += cell(r[3]);
  }
  CHECK(std::abs(pct_sum / double(rows.size()) - 3.4) <= 0.05);
  CHECK(std::abs(double(validated) / double(checked) - 0.54) <= 0.005);
}
