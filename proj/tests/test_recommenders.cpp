#include <doctest.h>

#include <filesystem>

#include "parsrec/errors.hpp"
#include "parsrec/extraction.hpp"
#include "parsrec/recommend.hpp"
#include "parsrec/rng.hpp"
#include "parsrec/synth.hpp"
#include "support/oracles.hpp"

using namespace parsrec;

namespace {

// Hand-built extraction table: cells are plain data, no parser involved.
struct TableFixture {
    std::vector<ReferenceRecord> refs;
    ExtractionTable table;
};

ParsedReference make_fields(std::initializer_list<std::pair<std::string, std::string>> fields) {
    ParsedReference out;
    for (const auto& [t, v] : fields) out.add(t, v);
    return out;
}

// Every ref has truth {year 2008, volume 36}; raw strings vary.
TableFixture fixture_with(const std::vector<std::string>& parser_ids, std::size_t n_refs) {
    TableFixture fx;
    std::vector<std::string> ref_ids;
    for (std::size_t i = 0; i < n_refs; ++i) {
        ReferenceRecord r;
        r.ref_id = "r" + std::to_string(i);
        r.doc_id = "d" + std::to_string(i % 3);
        r.raw = "Reference number " + std::to_string(i) + ", with " + std::string(i % 5, 'x') +
                " padding; 2008.";
        r.truth = make_fields({{"year", "2008"}, {"volume", "36"}});
        ref_ids.push_back(r.ref_id);
        fx.refs.push_back(std::move(r));
    }
    fx.table = ExtractionTable(parser_ids, ref_ids);
    fx.table.refs_hash = hash_refs(fx.refs);
    return fx;
}

}  // namespace

TEST_CASE("per_parser_f1_table computes the regression responses") {
    auto fx = fixture_with({"good", "half"}, 4);
    for (const auto& r : fx.refs) {
        fx.table.set_cell("good", r.ref_id, {*r.truth, false});
        // one right, one wrong, nothing extra: F1 = 2/3
        fx.table.set_cell("half", r.ref_id,
                          {make_fields({{"year", "2008"}, {"volume", "999"}}), false});
    }
    const auto f1 = per_parser_f1_table(fx.table, fx.refs);
    REQUIRE(f1.size() == 4);
    for (const auto& row : f1) {
        CHECK(row[0] == doctest::Approx(1.0));
        CHECK(row[1] == doctest::Approx(2.0 / 3.0));
    }
}

TEST_CASE("a constant-F1 parser gets a constant model") {
    auto fx = fixture_with({"half"}, 10);
    for (const auto& r : fx.refs)
        fx.table.set_cell("half", r.ref_id,
                          {make_fields({{"year", "2008"}, {"volume", "999"}}), false});
    const auto rec = train_ref_recommender(fx.table, fx.refs, NgramVocabulary{}, 1e-3);
    for (const auto& r : fx.refs) {
        const auto ranking = recommend_ref(rec, r.raw);
        CHECK(ranking.entries[0].second == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    }
    // unseen input too: the model is constant
    CHECK(recommend_ref(rec, "Totally different text").entries[0].second ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("a dominant parser is ranked first everywhere") {
    auto fx = fixture_with({"weak", "strong"}, 12);
    for (const auto& r : fx.refs) {
        fx.table.set_cell("strong", r.ref_id, {*r.truth, false});
        fx.table.set_cell("weak", r.ref_id, {make_fields({{"year", "2008"}}), false});
    }
    const auto rec = train_ref_recommender(fx.table, fx.refs, NgramVocabulary{}, 1e-3);
    for (const auto& r : fx.refs) CHECK(recommend_ref(rec, r.raw).top() == "strong");
}

TEST_CASE("ranking covers all parsers and breaks ties by registry order") {
    RefRecommender rec;
    rec.registry_order = {"alpha", "beta", "gamma"};
    LinearModel same;
    same.weights = {};
    same.intercept = 0.5;
    for (const auto& id : rec.registry_order) rec.models.emplace(id, same);
    const auto ranking = recommend_ref(rec, "whatever text");
    REQUIRE(ranking.entries.size() == 3);
    CHECK(ranking.entries[0].first == "alpha");
    CHECK(ranking.entries[1].first == "beta");
    CHECK(ranking.entries[2].first == "gamma");
}

TEST_CASE("explicit scores sort descending") {
    RefRecommender rec;
    rec.registry_order = {"A", "B", "C"};
    const auto with_intercept = [](double b) {
        LinearModel m;
        m.intercept = b;
        return m;
    };
    rec.models.emplace("A", with_intercept(0.9));
    rec.models.emplace("B", with_intercept(0.56));
    rec.models.emplace("C", with_intercept(0.78));
    const auto ranking = recommend_ref(rec, "text");
    CHECK(ranking.entries[0].first == "A");
    CHECK(ranking.entries[1].first == "C");
    CHECK(ranking.entries[2].first == "B");
}

TEST_CASE("a shared monotone transform of scores keeps the ranking") {
    std::mt19937_64 gen(4);
    RefRecommender a, b;
    a.registry_order = b.registry_order = {"p0", "p1", "p2", "p3"};
    // b's scores are 2s + 0.1 for a's scores s
    for (const auto& id : a.registry_order) {
        LinearModel ma;
        ma.weights = {2.0 * uniform_real(gen) - 1.0, uniform_real(gen)};
        ma.intercept = uniform_real(gen);
        LinearModel mb;
        mb.weights = {2.0 * ma.weights[0], 2.0 * ma.weights[1]};
        mb.intercept = 2.0 * ma.intercept + 0.1;
        a.models.emplace(id, ma);
        b.models.emplace(id, mb);
    }
    // same argmax (indeed the same full order) on random inputs
    for (int trial = 0; trial < 50; ++trial) {
        std::string raw;
        for (int i = 0; i < 6; ++i)
            raw += std::string(1, static_cast<char>('a' + uniform_below(gen, 26))) +
                   (uniform_below(gen, 2) ? ", " : " ");
        const auto ra = recommend_ref(a, raw);
        const auto rb = recommend_ref(b, raw);
        for (std::size_t i = 0; i < ra.entries.size(); ++i)
            CHECK(ra.entries[i].first == rb.entries[i].first);
    }
}

TEST_CASE("assemble_ref takes the top parser's output verbatim") {
    Ranking ranking;
    ranking.entries = {{"top", 0.9}, {"next", 0.5}};
    const auto top_fields = make_fields({{"year", "1999"}, {"author", "Someone, T."}});
    const auto source = [&](const std::string& id) -> ParseOutcome {
        if (id == "top") return {top_fields, false};
        return {make_fields({{"year", "2000"}}), false};
    };
    std::string chosen;
    const auto out = assemble_ref(ranking, source, {}, &chosen);
    CHECK(out == top_fields);
    CHECK(chosen == "top");
}

TEST_CASE("fallback on failure is off by default and opt-in") {
    Ranking ranking;
    ranking.entries = {{"broken", 0.9}, {"next", 0.5}};
    const auto source = [&](const std::string& id) -> ParseOutcome {
        if (id == "broken") return {{}, true};
        return {make_fields({{"year", "2000"}}), false};
    };
    // default: chosen parser failure means empty result
    const auto strict = assemble_ref(ranking, source);
    CHECK(strict.empty());
    // with the flag: second-ranked parser's output
    std::string chosen;
    const auto fallback = assemble_ref(ranking, source, {true}, &chosen);
    CHECK(fallback.values_of("year") == std::vector<std::string>{"2000"});
    CHECK(chosen == "next");
}

TEST_CASE("singleton registry always picks that parser") {
    auto fx = fixture_with({"only"}, 5);
    for (const auto& r : fx.refs) fx.table.set_cell("only", r.ref_id, {*r.truth, false});
    const auto rec = train_ref_recommender(fx.table, fx.refs, NgramVocabulary{}, 1e-3);
    for (const auto& r : fx.refs) {
        const auto ranking = recommend_ref(rec, r.raw);
        REQUIRE(ranking.entries.size() == 1);
        CHECK(ranking.top() == "only");
    }
}

TEST_CASE("type_extracted_correctly uses multiset equality with both-empty correct") {
    const auto truth = make_fields({{"year", "2008"}, {"author", "A"}, {"author", "B"}});
    CHECK(type_extracted_correctly(make_fields({{"year", "2008"}}), truth, "year"));
    CHECK_FALSE(type_extracted_correctly(make_fields({{"year", "2009"}}), truth, "year"));
    CHECK_FALSE(type_extracted_correctly({}, truth, "year"));
    // both empty counts as correct
    CHECK(type_extracted_correctly(make_fields({{"year", "2008"}}), truth, "issue"));
    // multiset: both authors required, order free
    CHECK(type_extracted_correctly(make_fields({{"author", "B"}, {"author", "A"}}), truth,
                                   "author"));
    CHECK_FALSE(type_extracted_correctly(make_fields({{"author", "A"}}), truth, "author"));
    CHECK_FALSE(type_extracted_correctly(make_fields({{"author", "A"}, {"author", "A"}}), truth,
                                         "author"));
}

TEST_CASE("field recommender degenerate labels give one-sided probabilities") {
    const MetadataTypeSet types({"year", "volume"});
    auto fx = fixture_with({"never_year", "always_year"}, 14);
    for (const auto& r : fx.refs) {
        fx.table.set_cell("never_year", r.ref_id, {make_fields({{"volume", "36"}}), false});
        fx.table.set_cell("always_year", r.ref_id, {*r.truth, false});
    }
    const auto rec = train_field_recommender(fx.table, fx.refs, NgramVocabulary{}, types);
    for (const auto& r : fx.refs) {
        const auto rankings = recommend_field(rec, r.raw);
        REQUIRE(rankings.size() == 2);
        // year: the always-correct parser wins with high confidence
        CHECK(rankings.at("year").top() == "always_year");
        const auto& year_entries = rankings.at("year").entries;
        for (const auto& [id, p] : year_entries) {
            if (id == "never_year") CHECK(p < 0.5);
            if (id == "always_year") CHECK(p > 0.5);
        }
        // volume: both always correct; tie resolves to registry order
        CHECK(rankings.at("volume").top() == "never_year");
    }
}

TEST_CASE("recommend_field shape: one ranking per type covering all parsers") {
    const MetadataTypeSet types = MetadataTypeSet::default_set();
    auto fx = fixture_with({"a", "b", "c"}, 8);
    for (const auto& r : fx.refs) {
        fx.table.set_cell("a", r.ref_id, {*r.truth, false});
        fx.table.set_cell("b", r.ref_id, {make_fields({{"year", "2008"}}), false});
        fx.table.set_cell("c", r.ref_id, {{}, false});
    }
    const auto rec = train_field_recommender(fx.table, fx.refs, NgramVocabulary{}, types);
    const auto rankings = recommend_field(rec, fx.refs[0].raw);
    CHECK(rankings.size() == 6);
    for (const auto& [type, ranking] : rankings) CHECK(ranking.entries.size() == 3);
}

TEST_CASE("assemble_field takes each type from its chosen parser only") {
    std::map<std::string, Ranking> rankings;
    Ranking year_rank;
    year_rank.entries = {{"P1", 0.9}, {"P2", 0.2}};
    Ranking volume_rank;
    volume_rank.entries = {{"P2", 0.8}, {"P1", 0.3}};
    rankings["year"] = year_rank;
    rankings["volume"] = volume_rank;

    const auto source = [](const std::string& id) -> ParseOutcome {
        if (id == "P1") return {make_fields({{"year", "1111"}, {"volume", "1"}}), false};
        return {make_fields({{"year", "2222"}, {"volume", "2"}}), false};
    };
    std::map<std::string, std::string> chosen;
    const auto out = assemble_field(rankings, source, {}, &chosen);
    CHECK(out.values_of("year") == std::vector<std::string>{"1111"});
    CHECK(out.values_of("volume") == std::vector<std::string>{"2"});
    CHECK(chosen.at("year") == "P1");
    CHECK(chosen.at("volume") == "P2");
}

TEST_CASE("assemble_field: chosen parser emitting nothing for its type leaves it absent") {
    std::map<std::string, Ranking> rankings;
    Ranking r;
    r.entries = {{"P1", 0.9}, {"P2", 0.5}};
    rankings["issue"] = r;
    const auto source = [](const std::string&) -> ParseOutcome {
        return {make_fields({{"year", "2000"}}), false};
    };
    const auto out = assemble_field(rankings, source);
    CHECK(out.empty());
}

TEST_CASE("when every type picks the same parser, field equals ref assembly") {
    std::map<std::string, Ranking> rankings;
    Ranking r;
    r.entries = {{"P1", 0.9}, {"P2", 0.5}};
    rankings["year"] = r;
    rankings["volume"] = r;
    const auto fields = make_fields({{"year", "1111"}, {"volume", "1"}});
    const auto source = [&](const std::string& id) -> ParseOutcome {
        if (id == "P1") return {fields, false};
        return {make_fields({{"year", "2222"}}), false};
    };
    const auto field_out = assemble_field(rankings, source);
    Ranking ref_rank;
    ref_rank.entries = r.entries;
    const auto ref_out = assemble_ref(ref_rank, source);
    // same multiset of fields (field assembly may reorder across types)
    CHECK(match_fields(field_out, ref_out).fp == 0);
    CHECK(match_fields(field_out, ref_out).fn == 0);
}

TEST_CASE("fit_baselines picks per-type specialists for the hybrid") {
    const MetadataTypeSet types({"author", "year", "volume"});
    auto fx = fixture_with({"author_pro", "year_pro", "rounded"}, 9);
    for (const auto& r : fx.refs) {
        fx.table.set_cell("author_pro", r.ref_id,
                          {make_fields({{"author", "X"}, {"year", "1800"}}), false});
        fx.table.set_cell("year_pro", r.ref_id, {make_fields({{"year", "2008"}}), false});
        fx.table.set_cell("rounded", r.ref_id,
                          {make_fields({{"year", "2008"}, {"volume", "36"}}), false});
    }
    // give truth an author so author_pro can win that type
    for (auto& r : fx.refs) r.truth->add("author", "X");

    const auto policy = fit_baselines(fx.table, fx.refs, types, 3);
    CHECK(policy.single_best == "rounded");
    CHECK(policy.hybrid.at("author") == "author_pro");
    CHECK(policy.hybrid.at("year") == "year_pro");  // tie with rounded? year_pro has no fp
    CHECK(policy.hybrid.at("volume") == "rounded");
    CHECK(policy.voting_threshold == 3);
}

TEST_CASE("fit_baselines tie falls back to registry order") {
    auto fx = fixture_with({"first", "second"}, 6);
    for (const auto& r : fx.refs) {
        fx.table.set_cell("first", r.ref_id, {*r.truth, false});
        fx.table.set_cell("second", r.ref_id, {*r.truth, false});
    }
    const auto policy = fit_baselines(fx.table, fx.refs, MetadataTypeSet({"year", "volume"}), 1);
    CHECK(policy.single_best == "first");
    CHECK(policy.hybrid.at("year") == "first");
}

TEST_CASE("voting threshold semantics") {
    const auto out_a = make_fields({{"year", "2008"}, {"volume", "36"}});
    const auto out_b = make_fields({{"year", "2008"}});
    const auto out_c = make_fields({{"year", "2008"}, {"volume", "99"}});
    const auto out_d = make_fields({{"volume", "36"}});

    SUBCASE("a field in 3 of the outputs passes m = 3") {
        const auto voted = parse_with_voting({{out_a, false}, {out_b, false}, {out_c, false}}, 3);
        CHECK(voted.values_of("year") == std::vector<std::string>{"2008"});
        CHECK(voted.values_of("volume").empty());  // 36 has 1 vote, 99 has 1
    }
    SUBCASE("a field in only 2 outputs is excluded at m = 3") {
        const auto voted = parse_with_voting({{out_a, false}, {out_d, false}, {out_c, false}}, 3);
        CHECK(voted.values_of("volume").empty());
        CHECK(voted.values_of("year").empty());  // year only in a and c
    }
    SUBCASE("m = 1 is the deduplicated union with max multiplicity") {
        ParsedReference twice;
        twice.add("author", "A");
        twice.add("author", "A");
        ParsedReference once;
        once.add("author", "A");
        once.add("year", "2008");
        const auto voted = parse_with_voting({{twice, false}, {once, false}}, 1);
        CHECK(voted.values_of("author") == std::vector<std::string>{"A", "A"});
        CHECK(voted.values_of("year") == std::vector<std::string>{"2008"});
    }
    SUBCASE("failed outputs contribute nothing") {
        const auto voted = parse_with_voting({{out_a, true}, {out_b, false}, {out_c, false}}, 3);
        CHECK(voted.empty());
    }
    SUBCASE("threshold below 1 is rejected") {
        CHECK_THROWS_AS(parse_with_voting({{out_a, false}}, 0), InvalidInput);
    }
}

TEST_CASE("collapse: a single-parser registry makes all five systems identical") {
    SynthParams params;
    params.styles = default_styles();
    params.n_docs = 12;
    params.refs_per_doc = 5;
    params.seed = 33;
    const auto corpus = synth(params);
    const auto refs = corpus.records;

    ParserRegistry registry = registry_from_builtin_ids({"bracket"});
    ParserRunner runner(registry);
    const auto table = run_all_parsers(runner, refs);

    const auto vocab = NgramVocabulary{};
    const auto ref_rec = train_ref_recommender(table, refs, vocab, 1e-3);
    const auto field_rec =
        train_field_recommender(table, refs, vocab, MetadataTypeSet::default_set());
    const auto policy = fit_baselines(table, refs, MetadataTypeSet::default_set(), 1);
    CHECK(policy.single_best == "bracket");

    const auto single = outputs_single_parser(table, policy.single_best);
    const auto hybrid = outputs_hybrid(table, policy, MetadataTypeSet::default_set());
    const auto voting = outputs_voting(table, 1);
    const auto by_ref = outputs_ref_variant(ref_rec, refs, table);
    const auto by_field = outputs_field_variant(field_rec, refs, table);

    for (const auto& r : refs) {
        const auto& base = single.at(r.ref_id);
        // identical multisets of fields for every system
        for (const auto* other : {&hybrid, &voting, &by_ref, &by_field}) {
            const auto m = match_fields(other->at(r.ref_id), base);
            CHECK(m.fp == 0);
            CHECK(m.fn == 0);
        }
    }
}

TEST_CASE("the perfect-information recommender dominates every baseline") {
    SynthParams params;
    params.styles = default_styles();
    params.n_docs = 40;
    params.refs_per_doc = 6;
    params.seed = 17;
    const auto corpus = synth(params);
    const auto refs = corpus.records;
    const auto types = MetadataTypeSet::default_set();

    ParserRunner runner(builtin_registry());
    const auto table = run_all_parsers(runner, refs);
    const auto policy = fit_baselines(table, refs, types, 3);

    const auto oracle_outputs = oracle::perfect_field_outputs(table, refs, types);
    const double oracle_f1 = evaluate_system("oracle", oracle_outputs, refs, types).micro_f1;

    const double single =
        evaluate_system("s", outputs_single_parser(table, policy.single_best), refs, types).micro_f1;
    const double hybrid =
        evaluate_system("h", outputs_hybrid(table, policy, types), refs, types).micro_f1;
    const double voting =
        evaluate_system("v", outputs_voting(table, policy.voting_threshold), refs, types).micro_f1;
    const double oracle_ref =
        evaluate_system("or", oracle::perfect_ref_outputs(table, refs), refs, types).micro_f1;

    CHECK(oracle_f1 >= single);
    CHECK(oracle_f1 >= hybrid);
    CHECK(oracle_f1 >= voting);
    CHECK(oracle_f1 >= oracle_ref);
    CHECK(oracle_ref >= single);
}

TEST_CASE("recommender bundles round trip through disk") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "parsrec_bundle_test";
    fs::remove_all(dir);
    fs::create_directories(dir);

    auto fx = fixture_with({"p0", "p1"}, 10);
    for (const auto& r : fx.refs) {
        fx.table.set_cell("p0", r.ref_id, {*r.truth, false});
        fx.table.set_cell("p1", r.ref_id, {make_fields({{"year", "2008"}}), false});
    }
    NgramVocabulary vocab;
    NgramPattern p;
    p.classes = {TokenClass::Number, TokenClass::Comma, TokenClass::Number};
    vocab.patterns = {p};
    vocab.k = 1;

    const auto ref_rec = train_ref_recommender(fx.table, fx.refs, vocab, 1e-3);
    save_ref_recommender(ref_rec, (dir / "ref").string(), "hash1");
    const auto ref_back = load_ref_recommender((dir / "ref").string());
    CHECK(ref_back.registry_order == ref_rec.registry_order);
    CHECK(ref_back.vocab.patterns == ref_rec.vocab.patterns);
    for (const auto& r : fx.refs)
        CHECK(recommend_ref(ref_back, r.raw).top() == recommend_ref(ref_rec, r.raw).top());

    const MetadataTypeSet types({"year", "volume"});
    const auto field_rec = train_field_recommender(fx.table, fx.refs, vocab, types);
    save_field_recommender(field_rec, (dir / "field").string(), "hash1");
    const auto field_back = load_field_recommender((dir / "field").string());
    CHECK(field_back.registry_order == field_rec.registry_order);
    CHECK(field_back.types.labels() == types.labels());
    for (const auto& r : fx.refs) {
        const auto a = recommend_field(field_back, r.raw);
        const auto b = recommend_field(field_rec, r.raw);
        for (const auto& [type, ranking] : a) CHECK(ranking.top() == b.at(type).top());
    }

    BaselinePolicies policy;
    policy.single_best = "p0";
    policy.hybrid = {{"year", "p1"}, {"volume", "p0"}};
    policy.voting_threshold = 2;
    save_baselines(policy, (dir / "baselines.json").string(), "hash1");
    std::string train_hash;
    const auto policy_back = load_baselines((dir / "baselines.json").string(), &train_hash);
    CHECK(policy_back.single_best == "p0");
    CHECK(policy_back.hybrid == policy.hybrid);
    CHECK(policy_back.voting_threshold == 2);
    CHECK(train_hash == "hash1");
    fs::remove_all(dir);
}

TEST_CASE("training rejects an empty meta set") {
    ExtractionTable table({"p"}, {});
    CHECK_THROWS_AS(train_ref_recommender(table, {}, NgramVocabulary{}, 1e-3), InvalidInput);
    CHECK_THROWS_AS(
        train_field_recommender(table, {}, NgramVocabulary{}, MetadataTypeSet::default_set()),
        InvalidInput);
    CHECK_THROWS_AS(fit_baselines(table, {}, MetadataTypeSet::default_set(), 3), InvalidInput);
}
