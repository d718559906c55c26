#include "doctest.h"

#include <cmath>

#include "dftforge/tfidf.hpp"
#include "support/ref_tfidf.hpp"

using namespace dftforge;

TEST_CASE("tokenize: lowercase alnum runs of length >= 2") {
    CHECK(tokenize(R"({"type": "$and"})") == std::vector<std::string>{"type", "and"});
    CHECK(tokenize(R"("bits": [5, 12])") == std::vector<std::string>{"bits", "12"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("A_b-C d5 e") == std::vector<std::string>{"a_b", "d5"});
    CHECK(tokenize("XOR xor XOr") == std::vector<std::string>{"xor", "xor", "xor"});
}

TEST_CASE("fit: hand-computed idf on a two-document corpus") {
    TfidfModel m = TfidfModel::fit({"cell cell port", "cell net"});
    REQUIRE(m.vocabulary() == std::vector<std::string>{"cell", "net", "port"});
    // idf = ln((1+2)/(1+df)) + 1
    CHECK(m.idf()[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.idf()[1] == doctest::Approx(std::log(1.5) + 1.0).epsilon(1e-12));
    CHECK(m.idf()[2] == doctest::Approx(std::log(1.5) + 1.0).epsilon(1e-12));
}

TEST_CASE("fit: single-document corpus gives idf 1 everywhere") {
    TfidfModel m = TfidfModel::fit({"alpha beta beta"});
    for (double v : m.idf()) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("fit: 600 uniform terms keep the lexicographically first 512") {
    std::string doc;
    std::vector<std::string> terms;
    for (int i = 0; i < 600; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "t%03d", i);
        terms.push_back(buf);
        doc += buf;
        doc += ' ';
    }
    TfidfModel m = TfidfModel::fit({doc});
    REQUIRE(m.vocabulary().size() == 512);
    std::sort(terms.begin(), terms.end());
    for (std::size_t i = 0; i < 512; ++i) CHECK(m.vocabulary()[i] == terms[i]);
}

TEST_CASE("transform: hand computation on the two-document model") {
    TfidfModel m = TfidfModel::fit({"cell cell port", "cell net"});
    FeatureVector fv = m.transform("cell cell port");
    REQUIRE(fv.x.size() == kFeatureDim);
    CHECK_FALSE(fv.all_oov);
    // weights before normalization: cell=(1+ln2)*1, port=1*(ln1.5+1), net=0
    const double wc = 1.0 + std::log(2.0);
    const double wp = std::log(1.5) + 1.0;
    const double norm = std::sqrt(wc * wc + wp * wp);
    CHECK(fv.x[0] == doctest::Approx(wc / norm).epsilon(1e-12)); // ~0.769447
    CHECK(fv.x[1] == doctest::Approx(0.0));
    CHECK(fv.x[2] == doctest::Approx(wp / norm).epsilon(1e-12)); // ~0.638711
    CHECK(fv.x[0] == doctest::Approx(0.76945).epsilon(1e-4));
    for (std::size_t i = 3; i < kFeatureDim; ++i) CHECK(fv.x[i] == 0.0);
}

TEST_CASE("transform: OOV document flagged as the zero vector") {
    TfidfModel m = TfidfModel::fit({"cell cell port", "cell net"});
    FeatureVector fv = m.transform("zzz qqq");
    CHECK(fv.all_oov);
    for (double v : fv.x) CHECK(v == 0.0);
}

TEST_CASE("transform: single-term document is one-hot with norm 1") {
    TfidfModel m = TfidfModel::fit({"cell cell port", "cell net"});
    FeatureVector fv = m.transform("cell");
    CHECK(fv.x[0] == doctest::Approx(1.0).epsilon(1e-15));
    double norm = 0;
    for (double v : fv.x) norm += v * v;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("property: transform norm is 0 or 1 and fit-corpus docs are non-zero") {
    DetRng rng(77);
    std::vector<std::string> corpus;
    const char* words[] = {"and", "oder", "xor", "dff", "mux", "port", "net", "cell", "bit", "clk"};
    for (int d = 0; d < 30; ++d) {
        std::string doc;
        const std::size_t len = 3 + rng.index(20);
        for (std::size_t i = 0; i < len; ++i) {
            doc += words[rng.index(10)];
            doc += ' ';
        }
        corpus.push_back(doc);
    }
    TfidfModel m = TfidfModel::fit(corpus);
    for (const auto& doc : corpus) {
        FeatureVector fv = m.transform(doc);
        double norm = 0;
        for (double v : fv.x) norm += v * v;
        norm = std::sqrt(norm);
        CHECK_FALSE(fv.all_oov);
        CHECK(std::abs(norm - 1.0) < 1e-12);
    }
    // idempotence w.r.t. model state: same input, same output
    FeatureVector a = m.transform(corpus[0]);
    FeatureVector b = m.transform(corpus[0]);
    CHECK(a.x == b.x);
}

TEST_CASE("oracle equivalence on a tie-free synthetic corpus") {
    // Distinct counts per term avoid selection-boundary ties entirely.
    DetRng rng(123);
    std::vector<std::string> corpus;
    for (int d = 0; d < 50; ++d) {
        std::string doc;
        for (int t = 0; t < 40; ++t) {
            const std::size_t w = rng.index(200);
            const std::size_t reps = 1 + w % 3;
            for (std::size_t r = 0; r < reps; ++r)
                doc += "w" + std::to_string(w) + " ";
        }
        corpus.push_back(doc);
    }
    TfidfModel ours = TfidfModel::fit(corpus);
    ref_tfidf::Model theirs = ref_tfidf::fit(corpus, kFeatureDim);
    for (const auto& doc : corpus) {
        FeatureVector fv = ours.transform(doc);
        std::vector<double> ref = ref_tfidf::transform(theirs, doc);
        REQUIRE(ref.size() == fv.x.size());
        for (std::size_t i = 0; i < ref.size(); ++i)
            CHECK(std::abs(fv.x[i] - ref[i]) < 1e-9);
    }
}

TEST_CASE("fit rejects an empty corpus") {
    CHECK_THROWS_AS(TfidfModel::fit({}), Error);
}

TEST_CASE("persistence: versioned JSON round trip, version mismatch rejected") {
    TfidfModel m = TfidfModel::fit({"cell cell port", "cell net"});
    std::string j = m.to_json();
    TfidfModel r = TfidfModel::from_json(j);
    CHECK(r.vocabulary() == m.vocabulary());
    CHECK(r.idf() == m.idf());
    CHECK(r.fingerprint() == m.fingerprint());
    FeatureVector a = m.transform("cell port port");
    FeatureVector b = r.transform("cell port port");
    CHECK(a.x == b.x);

    std::string bad = j;
    bad.replace(bad.find("\"version\":1"), 11, "\"version\":9");
    CHECK_THROWS_WITH_AS(TfidfModel::from_json(bad), doctest::Contains("version"), Error);
}
