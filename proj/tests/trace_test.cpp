#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <set>

#include "spotter/bench_sim.hpp"
#include "spotter/trace.hpp"
#include "support/random_snapshot.hpp"

using namespace spotter;

namespace {

const char* kHeader = "session s1 2009-05-12T14:03:00 1000\n";

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("spotter_trace_" + name)).string();
}

Snapshot small_valid() {
    return load_snapshot_text(std::string(kHeader) +
                              "agent 0 master1\n"
                              "agent 1 agent001\n"
                              "message 2 1 master1 agent001 5 10 request pleaseDoThing(20)\n"
                              "activity 3 agent001 12 5 working hard\n");
}

// Re-derives each typed invariant without sharing code with validate().
bool independent_ok(const Snapshot& s) {
    std::set<std::string> names;
    std::set<SeqNo> seqs;
    std::set<MessageId> ids;
    auto seq_ok = [&](SeqNo q) { return seqs.insert(q).second; };
    for (const auto& a : s.agents) {
        if (!names.insert(a.name).second || a.name.empty()) return false;
        if (!seq_ok(a.seq)) return false;
    }
    for (const auto& m : s.messages) {
        if (!seq_ok(m.seq) || !ids.insert(m.msg_id).second) return false;
        if (!names.count(m.sender) || !names.count(m.receiver)) return false;
        if (m.sent_ts.micros < 0 || m.recv_ts.micros < m.sent_ts.micros) return false;
        if (m.recv_ts.micros > s.header.duration.micros) return false;
    }
    for (const auto& a : s.activities) {
        if (!seq_ok(a.seq) || !names.count(a.agent)) return false;
        if (a.duration.micros < 0 || a.ts.micros < 0 || a.ts.micros > s.header.duration.micros) return false;
    }
    return true;
}

}  // namespace

TEST(ReadSnapshot, HeaderOnlyGivesEmptyLists) {
    const auto s = load_snapshot_text(kHeader);
    EXPECT_EQ(s.header.session_id, "s1");
    EXPECT_EQ(s.header.capture_date.to_string(), "2009-05-12T14:03:00");
    EXPECT_EQ(s.header.duration.micros, 1000);
    EXPECT_TRUE(s.agents.empty());
    EXPECT_TRUE(s.messages.empty());
    EXPECT_TRUE(s.activities.empty());
}

TEST(ReadSnapshot, OutOfOrderEventsAreSortedLikeStableSort) {
    const std::string text = std::string(kHeader) +
                             "agent 0 a\n"
                             "agent 1 b\n"
                             "activity 9 a 50 1\n"
                             "message 5 1 a b 40 41 inform x\n"
                             "activity 3 a 20 2\n"
                             "activity 4 a 20 3\n"
                             "message 2 2 b a 10 30 inform y\n"
                             "activity 8 b 20 4\n";
    const auto raw = parse_snapshot_text(text);
    auto expected = raw.activities;
    std::stable_sort(expected.begin(), expected.end(), [](const ActivityRecord& x, const ActivityRecord& y) {
        return std::tie(x.ts.micros, x.seq) < std::tie(y.ts.micros, y.seq);
    });
    const auto s = load_snapshot_text(text);
    EXPECT_EQ(s.activities, expected);
    ASSERT_EQ(s.messages.size(), 2u);
    EXPECT_EQ(s.messages[0].msg_id, 2);
    EXPECT_EQ(s.messages[1].msg_id, 1);
}

TEST(ReadSnapshot, UnregisteredAgentIsNamed) {
    const std::string text = std::string(kHeader) + "agent 0 a\nactivity 1 ghost 5 5\n";
    try {
        load_snapshot_text(text);
        FAIL() << "expected validation error";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
        ASSERT_EQ(e.violations().size(), 1u);
    }
}

TEST(ReadSnapshot, MalformedLineReportsLineNumber) {
    const std::string text = std::string(kHeader) + "agent 0 a\nactivity 1 a five 5\n";
    try {
        load_snapshot_text(text);
        FAIL() << "expected parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    EXPECT_THROW(load_snapshot_text("agent 0 a\n"), ParseError);
    EXPECT_THROW(load_snapshot_text(""), ParseError);
    EXPECT_THROW(load_snapshot_text("session s1 2009-13-12T14:03:00 10\n"), ParseError);
    EXPECT_THROW(load_snapshot_text(std::string(kHeader) + "agent 0 a extra\n"), ParseError);
    EXPECT_THROW(load_snapshot_text(std::string(kHeader) + "bogus 0 a\n"), ParseError);
    EXPECT_THROW(load_snapshot_text(std::string(kHeader) + "\nagent 0 a\n"), ParseError);
    EXPECT_THROW(load_snapshot_text(std::string(kHeader) + "message 1 1 a a 0 0\n"), ParseError);
}

TEST(ReadSnapshot, MissingFileIsIoError) { EXPECT_THROW(read_snapshot("/nonexistent/none.snap"), IoError); }

TEST(ReadSnapshot, ContentKeepsInnerWhitespace) {
    const auto s = load_snapshot_text(std::string(kHeader) +
                                      "agent 0 a\nmessage 1 7 a a 1 2 inform  lots of   words  \n");
    ASSERT_EQ(s.messages.size(), 1u);
    EXPECT_EQ(s.messages[0].content, "lots of   words");
    EXPECT_EQ(s.messages[0].content_key(), "inform: lots of   words");
}

TEST(WriteSnapshot, EmptyRoundTrip) {
    const auto s = load_snapshot_text(kHeader);
    const auto path = temp_path("empty.snap");
    write_snapshot(s, path);
    EXPECT_EQ(read_snapshot(path), s);
    std::filesystem::remove(path);
}

TEST(WriteSnapshot, SimulatorOutputRoundTripsFieldForField) {
    SimConfig c;
    c.seed = 9;
    c.duration = Duration{60'000};
    c.request_interval = Duration{1'000};
    c.planning_cost = Duration{10};
    const auto s = simulate(c);
    ASSERT_GE(s.messages.size() + s.activities.size(), 100u);
    const auto path = temp_path("sim.snap");
    write_snapshot(s, path);
    const auto back = read_snapshot(path);
    EXPECT_EQ(back, s);
    EXPECT_EQ(format_snapshot(back), format_snapshot(s));
    std::filesystem::remove(path);
}

TEST(WriteSnapshot, RejectsInvalidBeforeWriting) {
    auto s = small_valid();
    s.messages[0].recv_ts = Timestamp{1};
    const auto path = temp_path("invalid.snap");
    std::filesystem::remove(path);
    EXPECT_THROW(write_snapshot(s, path), ValidationError);
    EXPECT_FALSE(std::filesystem::exists(path));
}

TEST(WriteSnapshot, UnwritablePathIsIoError) {
    EXPECT_THROW(write_snapshot(small_valid(), "/nonexistent-dir/x.snap"), IoError);
}

TEST(Validate, ValidSnapshotHasNoViolations) { EXPECT_TRUE(validate(small_valid()).empty()); }

TEST(Validate, RecvBeforeSentCitesMessage) {
    auto s = small_valid();
    s.messages[0].sent_ts = Timestamp{11};
    const auto v = validate(s);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_NE(v[0].find("msg_id 1"), std::string::npos);
    EXPECT_NE(v[0].find("recv_ts"), std::string::npos);
}

TEST(Validate, OneViolationPerDuplicateMessageId) {
    auto s = small_valid();
    for (SeqNo q : {10, 11, 12}) {
        auto m = s.messages[0];
        m.seq = q;
        s.messages.push_back(m);
    }
    s.messages[2].msg_id = 2;
    // Brute-force count: every occurrence after the first of the same id.
    std::size_t expected = 0;
    for (std::size_t i = 0; i < s.messages.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (s.messages[j].msg_id == s.messages[i].msg_id) {
                ++expected;
                break;
            }
        }
    }
    const auto v = validate(s);
    const auto dups = std::count_if(v.begin(), v.end(),
                                    [](const std::string& x) { return x.find("duplicate msg_id") != std::string::npos; });
    EXPECT_EQ(static_cast<std::size_t>(dups), expected);
    EXPECT_EQ(expected, 2u);
}

TEST(Validate, DuplicateSeqAndAgentName) {
    auto s = small_valid();
    s.activities[0].seq = 2;
    s.agents.push_back({20, "master1"});
    const auto v = validate(s);
    EXPECT_EQ(v.size(), 2u);
}

TEST(SnapshotProperties, NormalizeIsIdempotent) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto once = normalize(testgen::random_snapshot(seed));
        EXPECT_EQ(normalize(once), once) << "seed " << seed;
    }
}

TEST(SnapshotProperties, RandomSnapshotsRoundTrip) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto s = normalize(testgen::random_snapshot(seed));
        const auto text = format_snapshot(s);
        const auto back = load_snapshot_text(text);
        ASSERT_EQ(back, s) << "seed " << seed;
        ASSERT_EQ(format_snapshot(back), text) << "seed " << seed;
    }
}

TEST(SnapshotProperties, ValidationAgreesWithIndependentRules) {
    std::mt19937_64 rng(77);
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        auto s = testgen::random_snapshot(seed, 30);
        // Corrupt one field at random (or nothing).
        switch (rng() % 6) {
            case 0:
                if (!s.messages.empty()) s.messages[0].recv_ts = Timestamp{s.messages[0].sent_ts.micros - 1};
                break;
            case 1:
                if (!s.activities.empty()) s.activities[0].agent = "ghost";
                break;
            case 2:
                if (s.messages.size() > 1) s.messages[1].msg_id = s.messages[0].msg_id;
                break;
            case 3:
                if (!s.activities.empty()) s.activities[0].seq = s.agents[0].seq;
                break;
            case 4:
                if (!s.activities.empty()) s.activities[0].ts = Timestamp{s.header.duration.micros + 1};
                break;
            default: break;
        }
        EXPECT_EQ(validate(s).empty(), independent_ok(s)) << "seed " << seed;
    }
}

TEST(CaptureDate, ParsesAndFormats) {
    auto d = CaptureDate::parse("2021-02-03T04:05:06Z");
    ASSERT_TRUE(d);
    EXPECT_TRUE(d->utc);
    EXPECT_EQ(d->to_string(), "2021-02-03T04:05:06Z");
    EXPECT_FALSE(CaptureDate::parse("2021-02-03 04:05:06"));
    EXPECT_FALSE(CaptureDate::parse("2021-02-03T24:05:06"));
}
