#pragma once

// Session data model and the line-oriented snapshot file format.
//
//   session <session_id> <capture_date> <duration_micros>
//   agent <seq> <name>
//   message <seq> <msg_id> <sender> <receiver> <sent_micros> <recv_micros> <performative> <content...>
//   activity <seq> <agent> <start_micros> <duration_micros> [description...]

#include <algorithm>
#include <charconv>
#include <compare>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace spotter {

/// Microseconds since session start.
struct Timestamp {
    std::int64_t micros = 0;
    friend constexpr auto operator<=>(Timestamp, Timestamp) = default;
};

/// Length of an interval in microseconds.
struct Duration {
    std::int64_t micros = 0;
    friend constexpr auto operator<=>(Duration, Duration) = default;
    constexpr Duration& operator+=(Duration other) {
        micros += other.micros;
        return *this;
    }
    friend constexpr Duration operator+(Duration a, Duration b) { return Duration{a.micros + b.micros}; }
};

using AgentId = std::string;
using MessageId = std::int64_t;
using SeqNo = std::int64_t;

/// Wall-clock capture time, `YYYY-MM-DDTHH:MM:SS` with an optional `Z` suffix.
struct CaptureDate {
    int year = 1970;
    int month = 1;
    int day = 1;
    int hour = 0;
    int minute = 0;
    int second = 0;
    bool utc = false;

    friend bool operator==(const CaptureDate&, const CaptureDate&) = default;

    std::string to_string() const {
        std::ostringstream out;
        out << std::setfill('0') << std::setw(4) << year << '-' << std::setw(2) << month << '-'
            << std::setw(2) << day << 'T' << std::setw(2) << hour << ':' << std::setw(2) << minute
            << ':' << std::setw(2) << second;
        if (utc) out << 'Z';
        return out.str();
    }

    static std::optional<CaptureDate> parse(std::string_view text) {
        CaptureDate d;
        if (!text.empty() && text.back() == 'Z') {
            d.utc = true;
            text.remove_suffix(1);
        }
        if (text.size() != 19 || text[4] != '-' || text[7] != '-' || text[10] != 'T' || text[13] != ':' ||
            text[16] != ':') {
            return std::nullopt;
        }
        auto field = [&](std::size_t pos, std::size_t len, int& out) {
            for (std::size_t i = pos; i < pos + len; ++i) {
                if (text[i] < '0' || text[i] > '9') return false;
            }
            std::from_chars(text.data() + pos, text.data() + pos + len, out);
            return true;
        };
        if (!field(0, 4, d.year) || !field(5, 2, d.month) || !field(8, 2, d.day) || !field(11, 2, d.hour) ||
            !field(14, 2, d.minute) || !field(17, 2, d.second)) {
            return std::nullopt;
        }
        if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31 || d.hour > 23 || d.minute > 59 ||
            d.second > 60) {
            return std::nullopt;
        }
        return d;
    }
};

struct SessionHeader {
    std::string session_id;
    CaptureDate capture_date;
    Duration duration;
    friend bool operator==(const SessionHeader&, const SessionHeader&) = default;
};

struct AgentRecord {
    SeqNo seq = 0;
    AgentId name;
    friend bool operator==(const AgentRecord&, const AgentRecord&) = default;
};

struct MessageRecord {
    SeqNo seq = 0;
    MessageId msg_id = 0;
    AgentId sender;
    AgentId receiver;
    Timestamp sent_ts;
    Timestamp recv_ts;
    std::string performative;
    std::string content;

    /// The "performative: content" key used for grouping and labels.
    std::string content_key() const { return performative + ": " + content; }

    friend bool operator==(const MessageRecord&, const MessageRecord&) = default;
};

struct ActivityRecord {
    SeqNo seq = 0;
    AgentId agent;
    Timestamp ts;
    Duration duration;
    std::string description;
    friend bool operator==(const ActivityRecord&, const ActivityRecord&) = default;
};

/// One profiling session. Immutable once loaded through read_snapshot.
struct Snapshot {
    SessionHeader header;
    std::vector<AgentRecord> agents;
    std::vector<MessageRecord> messages;
    std::vector<ActivityRecord> activities;
    friend bool operator==(const Snapshot&, const Snapshot&) = default;

    bool has_agent(std::string_view name) const {
        return std::any_of(agents.begin(), agents.end(), [&](const AgentRecord& a) { return a.name == name; });
    }
};

/// Ordering key shared by every timed event: (timestamp, seq).
struct EventKey {
    std::int64_t ts = 0;
    SeqNo seq = 0;
    friend constexpr auto operator<=>(EventKey, EventKey) = default;
};

inline EventKey receipt_key(const MessageRecord& m) { return {m.recv_ts.micros, m.seq}; }
inline EventKey send_key(const MessageRecord& m) { return {m.sent_ts.micros, m.seq}; }
inline EventKey start_key(const ActivityRecord& a) { return {a.ts.micros, a.seq}; }

class ParseError : public std::runtime_error {
  public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

class ValidationError : public std::runtime_error {
  public:
    explicit ValidationError(std::vector<std::string> violations)
        : std::runtime_error(join(violations)), violations_(std::move(violations)) {}
    const std::vector<std::string>& violations() const { return violations_; }

  private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out = "snapshot validation failed";
        for (const auto& s : v) out += "\n  " + s;
        return out;
    }
    std::vector<std::string> violations_;
};

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline bool has_space(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; });
}

inline bool is_trimmed_text(std::string_view s) {
    if (s.find_first_of("\n\r") != std::string_view::npos) return false;
    if (s.empty()) return true;
    auto ws = [](char c) { return c == ' ' || c == '\t'; };
    return !ws(s.front()) && !ws(s.back());
}

}  // namespace detail

/// Checks every snapshot invariant. Each entry names the offending record and rule.
inline std::vector<std::string> validate(const Snapshot& s) {
    std::vector<std::string> out;
    const auto& h = s.header;
    if (h.session_id.empty() || detail::has_space(h.session_id)) {
        out.push_back("header: session_id must be non-empty and contain no whitespace");
    }
    if (h.duration.micros < 0) out.push_back("header: duration must be non-negative");

    std::set<std::string_view> names;
    std::map<SeqNo, int> seq_uses;
    for (const auto& a : s.agents) {
        ++seq_uses[a.seq];
        if (a.name.empty() || detail::has_space(a.name)) {
            out.push_back("agent seq " + std::to_string(a.seq) + ": name must be non-empty without whitespace");
        }
        if (!names.insert(a.name).second) {
            out.push_back("agent seq " + std::to_string(a.seq) + ": duplicate agent name '" + a.name + "'");
        }
    }
    auto known = [&](const AgentId& n) { return names.count(n) != 0; };
    auto within = [&](std::int64_t ts) { return ts >= 0 && ts <= h.duration.micros; };

    std::map<MessageId, int> ids;
    for (const auto& m : s.messages) {
        ++seq_uses[m.seq];
        const std::string tag = "message seq " + std::to_string(m.seq) + " (msg_id " + std::to_string(m.msg_id) + ")";
        if (++ids[m.msg_id] > 1) out.push_back(tag + ": duplicate msg_id " + std::to_string(m.msg_id));
        if (!known(m.sender)) out.push_back(tag + ": unknown sender agent '" + m.sender + "'");
        if (!known(m.receiver)) out.push_back(tag + ": unknown receiver agent '" + m.receiver + "'");
        if (m.sent_ts.micros < 0 || m.recv_ts.micros < 0) out.push_back(tag + ": negative timestamp");
        if (m.recv_ts < m.sent_ts) out.push_back(tag + ": recv_ts precedes sent_ts");
        if (!within(m.sent_ts.micros) || !within(m.recv_ts.micros)) {
            out.push_back(tag + ": timestamp beyond session duration");
        }
        if (m.performative.empty() || detail::has_space(m.performative)) {
            out.push_back(tag + ": performative must be non-empty without whitespace");
        }
        if (!detail::is_trimmed_text(m.content)) {
            out.push_back(tag + ": content must be a single line without surrounding whitespace");
        }
    }
    for (const auto& a : s.activities) {
        ++seq_uses[a.seq];
        const std::string tag = "activity seq " + std::to_string(a.seq);
        if (!known(a.agent)) out.push_back(tag + ": unknown agent '" + a.agent + "'");
        if (a.duration.micros < 0) out.push_back(tag + ": negative duration");
        if (!within(a.ts.micros)) out.push_back(tag + ": start timestamp outside session");
        if (!detail::is_trimmed_text(a.description)) {
            out.push_back(tag + ": description must be a single line without surrounding whitespace");
        }
    }
    for (const auto& [seq, uses] : seq_uses) {
        if (uses > 1) out.push_back("seq " + std::to_string(seq) + ": used by " + std::to_string(uses) + " records");
    }
    return out;
}

/// Sorts agents by seq, messages by send key and activities by start key.
inline Snapshot normalize(Snapshot s) {
    std::stable_sort(s.agents.begin(), s.agents.end(),
                     [](const AgentRecord& a, const AgentRecord& b) { return a.seq < b.seq; });
    std::stable_sort(s.messages.begin(), s.messages.end(),
                     [](const MessageRecord& a, const MessageRecord& b) { return send_key(a) < send_key(b); });
    std::stable_sort(s.activities.begin(), s.activities.end(),
                     [](const ActivityRecord& a, const ActivityRecord& b) { return start_key(a) < start_key(b); });
    return s;
}

namespace detail {

struct Tokenizer {
    std::string_view rest;
    std::size_t line;

    static bool ws(char c) { return c == ' ' || c == '\t'; }

    void skip() {
        while (!rest.empty() && ws(rest.front())) rest.remove_prefix(1);
    }

    std::string_view word(const char* what) {
        skip();
        std::size_t n = 0;
        while (n < rest.size() && !ws(rest[n])) ++n;
        if (n == 0) throw ParseError(line, std::string("missing ") + what);
        auto w = rest.substr(0, n);
        rest.remove_prefix(n);
        return w;
    }

    std::int64_t integer(const char* what) {
        auto w = word(what);
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
        if (ec != std::errc{} || p != w.data() + w.size()) {
            throw ParseError(line, std::string("invalid integer for ") + what + ": '" + std::string(w) + "'");
        }
        return v;
    }

    std::string remainder() {
        skip();
        auto r = rest;
        while (!r.empty() && ws(r.back())) r.remove_suffix(1);
        rest = {};
        return std::string(r);
    }

    void done() {
        skip();
        if (!rest.empty()) throw ParseError(line, "unexpected trailing field '" + std::string(rest) + "'");
    }
};

}  // namespace detail

/// Parses snapshot text without validating cross-record invariants.
inline Snapshot parse_snapshot_text(std::string_view text) {
    Snapshot s;
    std::size_t line_no = 0;
    bool have_header = false;
    while (!text.empty()) {
        auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        detail::Tokenizer tok{line, line_no};
        tok.skip();
        if (tok.rest.empty()) {
            // Only a trailing newline is tolerated; blank lines are not records.
            if (text.empty()) break;
            throw ParseError(line_no, "empty line");
        }
        auto kind = tok.word("record kind");
        if (!have_header) {
            if (kind != "session") throw ParseError(line_no, "first line must be a session header");
            s.header.session_id = std::string(tok.word("session_id"));
            auto date_text = tok.word("capture_date");
            auto date = CaptureDate::parse(date_text);
            if (!date) throw ParseError(line_no, "invalid capture date '" + std::string(date_text) + "'");
            s.header.capture_date = *date;
            s.header.duration = Duration{tok.integer("duration")};
            tok.done();
            have_header = true;
        } else if (kind == "agent") {
            AgentRecord a;
            a.seq = tok.integer("seq");
            a.name = std::string(tok.word("agent name"));
            tok.done();
            s.agents.push_back(std::move(a));
        } else if (kind == "message") {
            MessageRecord m;
            m.seq = tok.integer("seq");
            m.msg_id = tok.integer("msg_id");
            m.sender = std::string(tok.word("sender"));
            m.receiver = std::string(tok.word("receiver"));
            m.sent_ts = Timestamp{tok.integer("sent timestamp")};
            m.recv_ts = Timestamp{tok.integer("recv timestamp")};
            m.performative = std::string(tok.word("performative"));
            m.content = tok.remainder();
            s.messages.push_back(std::move(m));
        } else if (kind == "activity") {
            ActivityRecord a;
            a.seq = tok.integer("seq");
            a.agent = std::string(tok.word("agent"));
            a.ts = Timestamp{tok.integer("start timestamp")};
            a.duration = Duration{tok.integer("duration")};
            a.description = tok.remainder();
            s.activities.push_back(std::move(a));
        } else if (kind == "session") {
            throw ParseError(line_no, "duplicate session header");
        } else {
            throw ParseError(line_no, "unknown record kind '" + std::string(kind) + "'");
        }
    }
    if (!have_header) throw ParseError(line_no == 0 ? 1 : line_no, "missing session header");
    return s;
}

/// Parses, validates and normalizes snapshot text.
inline Snapshot load_snapshot_text(std::string_view text) {
    Snapshot s = parse_snapshot_text(text);
    if (auto v = validate(s); !v.empty()) throw ValidationError(std::move(v));
    return normalize(std::move(s));
}

inline Snapshot read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open snapshot '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_snapshot_text(buf.str());
}

/// Serializes a valid snapshot. Events are interleaved in (timestamp, seq) order,
/// messages by their send key.
inline std::string format_snapshot(const Snapshot& input) {
    if (auto v = validate(input); !v.empty()) throw ValidationError(std::move(v));
    const Snapshot s = normalize(input);
    std::ostringstream out;
    out << "session " << s.header.session_id << ' ' << s.header.capture_date.to_string() << ' '
        << s.header.duration.micros << '\n';
    for (const auto& a : s.agents) out << "agent " << a.seq << ' ' << a.name << '\n';

    auto mi = s.messages.begin();
    auto ai = s.activities.begin();
    while (mi != s.messages.end() || ai != s.activities.end()) {
        bool take_message = ai == s.activities.end() ||
                            (mi != s.messages.end() && send_key(*mi) < start_key(*ai));
        if (take_message) {
            const auto& m = *mi++;
            out << "message " << m.seq << ' ' << m.msg_id << ' ' << m.sender << ' ' << m.receiver << ' '
                << m.sent_ts.micros << ' ' << m.recv_ts.micros << ' ' << m.performative;
            if (!m.content.empty()) out << ' ' << m.content;
            out << '\n';
        } else {
            const auto& a = *ai++;
            out << "activity " << a.seq << ' ' << a.agent << ' ' << a.ts.micros << ' ' << a.duration.micros;
            if (!a.description.empty()) out << ' ' << a.description;
            out << '\n';
        }
    }
    return out.str();
}

inline void write_snapshot(const Snapshot& s, const std::string& path) {
    const std::string text = format_snapshot(s);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace spotter
