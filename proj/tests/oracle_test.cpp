#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "sediment/error.hpp"
#include "sediment/io.hpp"
#include "sediment/oracle.hpp"

using namespace sediment;

namespace {

const std::filesystem::path kFixtures = SEDIMENT_FIXTURES_DIR;

const std::string kQ1 =
    "Who developed OpenClaw? What other notable projects has the developer worked on?";
const std::string kQ3 = "List the projects Peter Steinberger has been involved in.";

OracleRequest make_request(OraclePhase phase, std::vector<NamedBlob> inputs) {
    OracleRequest r;
    r.phase = phase;
    r.inputs = std::move(inputs);
    return r;
}

}  // namespace

TEST_CASE("phase and verdict names round-trip") {
    for (OraclePhase p : {OraclePhase::ingest_extract, OraclePhase::ceo_reasoning,
                          OraclePhase::answer_synthesis, OraclePhase::distill_judgement}) {
        CHECK(oracle_phase_from_name(oracle_phase_name(p)) == p);
    }
    for (OracleVerdict v : {OracleVerdict::none, OracleVerdict::answered,
                            OracleVerdict::answered_from_page, OracleVerdict::needs_more_context,
                            OracleVerdict::not_in_wiki}) {
        CHECK(oracle_verdict_from_name(oracle_verdict_name(v)) == v);
    }
    CHECK_THROWS_AS(oracle_phase_from_name("web_search"), OracleError);
    CHECK_THROWS_AS(oracle_verdict_from_name("maybe"), OracleError);
}

TEST_CASE("request signature joins input names and primary is the first blob") {
    OracleRequest r = make_request(OraclePhase::ceo_reasoning,
                                   {{"question", "Q"}, {"pages", "P1P2"}});
    CHECK(r.signature() == "question+pages");
    CHECK(r.primary() == "Q");

    OracleRequest empty;
    empty.phase = OraclePhase::ceo_reasoning;
    CHECK(empty.signature() == "");
    CHECK_THROWS_AS(empty.primary(), OracleError);
}

TEST_CASE("usage arithmetic") {
    Usage a{100, 20, 300};
    Usage b{5, 7, 11};
    a += b;
    CHECK(a == Usage{105, 27, 311});
    CHECK(a.total_tokens() == 132);
}

TEST_CASE("fixture file loads every scripted exchange") {
    FixtureOracle oracle = FixtureOracle::from_file(kFixtures / "oracle.jsonl");
    CHECK(oracle.scripted_process_count() == 13);
    CHECK(oracle.scripted_search_count() == 1);
}

TEST_CASE("scripted responses are deterministic and keyed on question text") {
    FixtureOracle oracle = FixtureOracle::from_file(kFixtures / "oracle.jsonl");

    OracleRequest probe = make_request(OraclePhase::answer_synthesis,
                                       {{"question", kQ1}, {"page", "body of the top page"}});
    OracleResponse first = oracle.process(probe);
    CHECK(first.verdict == OracleVerdict::needs_more_context);
    CHECK(first.usage == Usage{1000, 200, 2000});

    // Non-primary inputs do not participate in the key.
    probe.inputs[1].text = "a different page body";
    OracleResponse second = oracle.process(probe);
    CHECK(second.text == first.text);
    CHECK(second.usage == first.usage);
}

TEST_CASE("the first question costs 12000 tokens across its three exchanges") {
    FixtureOracle oracle = FixtureOracle::from_file(kFixtures / "oracle.jsonl");
    Usage total;
    total += oracle
                 .process(make_request(OraclePhase::answer_synthesis,
                                       {{"question", kQ1}, {"page", ""}}))
                 .usage;
    total += oracle
                 .process(make_request(OraclePhase::ceo_reasoning,
                                       {{"question", kQ1}, {"pages", ""}}))
                 .usage;
    total += oracle
                 .process(make_request(OraclePhase::distill_judgement,
                                       {{"question", kQ1}, {"answer", ""}}))
                 .usage;
    CHECK(total.total_tokens() == 12000);
}

TEST_CASE("ingest extraction proposes one summary, three entities, five concepts") {
    FixtureOracle oracle = FixtureOracle::from_file(kFixtures / "oracle.jsonl");
    std::string handbook = read_file(kFixtures / "handbook.md");
    OracleResponse r = oracle.process(
        make_request(OraclePhase::ingest_extract, {{"source", handbook}}));
    CHECK(r.proposed_pages.size() == 9);
    int summaries = 0, entities = 0, concepts = 0;
    for (const PageDraft& d : r.proposed_pages) {
        if (d.kind == PageKind::source_summary) ++summaries;
        if (d.kind == PageKind::entity) ++entities;
        if (d.kind == PageKind::concept_page) ++concepts;
        CHECK(d.importance >= 1);
        CHECK(d.importance <= 5);
    }
    CHECK(summaries == 1);
    CHECK(entities == 3);
    CHECK(concepts == 5);
    CHECK(r.usage.total_tokens() == 12000);
}

TEST_CASE("search returns six facts including one dated announcement") {
    FixtureOracle oracle = FixtureOracle::from_file(kFixtures / "oracle.jsonl");
    SearchResult s = oracle.search(kQ3);
    CHECK(s.facts.size() == 6);
    int dated = 0, undated = 0;
    bool joining = false;
    for (const SearchFact& f : s.facts) {
        f.date ? ++dated : ++undated;
        if (f.date == "2026-03") joining = true;
    }
    CHECK(dated == 5);
    CHECK(undated == 1);
    CHECK(joining);
    CHECK(s.writeback.entity_title == "Peter Steinberger");
    CHECK(s.writeback.importance == 5);
    CHECK(s.usage.total_tokens() + s.writeback.usage.total_tokens() == 16000);
}

TEST_CASE("an unscripted request fails loudly naming the key") {
    FixtureOracle oracle = FixtureOracle::from_file(kFixtures / "oracle.jsonl");
    OracleRequest r = make_request(OraclePhase::ceo_reasoning,
                                   {{"question", "Is there a tide table?"}});
    try {
        oracle.process(r);
        FAIL("expected FixtureMissError");
    } catch (const FixtureMissError& e) {
        std::string what = e.what();
        CHECK(what.find("ceo_reasoning") != std::string::npos);
        CHECK(what.find("question") != std::string::npos);
        CHECK(what.find("Is there a tide table?") != std::string::npos);
    }
    CHECK_THROWS_AS(oracle.search("unscripted query"), FixtureMissError);
}

TEST_CASE("malformed fixture lines are rejected") {
    CHECK_THROWS_AS(FixtureOracle::from_jsonl("not json\n"), OracleError);
    CHECK_THROWS_AS(FixtureOracle::from_jsonl(R"({"type":"mystery"})" "\n"), OracleError);
    CHECK_THROWS_AS(FixtureOracle::from_jsonl(
                        R"({"type":"process","phase":"ceo_reasoning","signature":"q",)"
                        R"("primary":"x","response":{"text":"","usage":)"
                        R"({"input_tokens":-1,"output_tokens":0,"latency_ms":0}}})" "\n"),
                    OracleError);
    // Two lines with the same key would make replay ambiguous.
    std::string line =
        R"({"type":"process","phase":"ceo_reasoning","signature":"question",)"
        R"("primary":"x","response":{"text":"","verdict":"answered",)"
        R"("usage":{"input_tokens":1,"output_tokens":1,"latency_ms":1}}})";
    CHECK_THROWS_AS(FixtureOracle::from_jsonl(line + "\n" + line + "\n"), OracleError);
}
