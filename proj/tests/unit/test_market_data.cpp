#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>
#include "stockcnn/error.hpp"
#include "stockcnn/market_data.hpp"
#include "../common/mock_server.hpp"
#include "support.hpp"

using namespace stockcnn;
using namespace stockcnn::market_data;

namespace {

const std::string kHeader = "Date,Open,High,Low,Close,Adj Close,Volume\n";

const std::string kFixture = kHeader +
                             "2019-01-02,100,105,99,104,104,1000\n"
                             "2019-01-03,104,106,101,102,101.5,2500\n"
                             "2019-01-04,102,103.25,100.5,103,103,0\n";

ErrorKind kind_of(const std::string& text)
{
    try {
        parse_csv(text);
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error";
    return ErrorKind::Io;
}

std::int64_t detail_of(const std::string& text)
{
    try {
        parse_csv(text);
    } catch (const Error& e) {
        return e.detail();
    }
    return -1;
}

} // namespace

TEST(ParseCsv, SingleRowMapsFields)
{
    const Series s = parse_csv(kHeader + "2019-01-02,100,105,99,104,104,1000\n", "X");
    ASSERT_EQ(s.size(), 1u);
    const Bar& b = s.bars[0];
    EXPECT_EQ(b.date, make_date(2019, 1, 2));
    EXPECT_EQ(b.open, 100.0);
    EXPECT_EQ(b.high, 105.0);
    EXPECT_EQ(b.low, 99.0);
    EXPECT_EQ(b.close, 104.0);
    EXPECT_EQ(b.adj_close, 104.0);
    EXPECT_EQ(b.volume, 1000u);
    EXPECT_EQ(s.ticker, "X");
}

TEST(ParseCsv, PriceViolationsLeftToValidate)
{
    const Series s = parse_csv(kHeader + "2019-01-02,99.5,99,100,99.5,99.5,10\n");
    const auto v = validate(s);
    ASSERT_FALSE(v.empty());
    EXPECT_TRUE(std::any_of(v.begin(), v.end(), [](const Violation& x) { return x.rule == rules::kHighAboveLow; }));
}

TEST(ParseCsv, DecreasingDateReportsLine)
{
    const std::string text = kHeader + "2019-01-03,1,1,1,1,1,1\n2019-01-02,1,1,1,1,1,1\n";
    EXPECT_EQ(kind_of(text), ErrorKind::NonMonotonicDates);
    EXPECT_EQ(detail_of(text), 3);
}

TEST(ParseCsv, RepeatedDateIsNonMonotonic)
{
    EXPECT_EQ(kind_of(kHeader + "2019-01-03,1,1,1,1,1,1\n2019-01-03,1,1,1,1,1,1\n"), ErrorKind::NonMonotonicDates);
}

TEST(ParseCsv, NegativeVolumeIsMalformed)
{
    const std::string text = kHeader + "2019-01-02,100,105,99,104,104,-5\n";
    EXPECT_EQ(kind_of(text), ErrorKind::MalformedRow);
    EXPECT_EQ(detail_of(text), 2);
}

TEST(ParseCsv, MalformedInputs)
{
    EXPECT_EQ(kind_of(kHeader + "2019-13-02,1,1,1,1,1,1\n"), ErrorKind::MalformedRow);
    EXPECT_EQ(kind_of(kHeader + "2019-01-02,1,x,1,1,1,1\n"), ErrorKind::MalformedRow);
    EXPECT_EQ(kind_of(kHeader + "2019-01-02,1,1,1,1,1\n"), ErrorKind::MalformedRow);
    EXPECT_EQ(kind_of(kHeader + "2019-01-02,1,1,1,1,1,1,9\n"), ErrorKind::MalformedRow);
    EXPECT_EQ(kind_of(kHeader + "2019-01-02,nan,1,1,1,1,1\n"), ErrorKind::MalformedRow);
    EXPECT_EQ(kind_of("Date,Open,High,Low,Close,Volume\n2019-01-02,1,1,1,1,1\n"), ErrorKind::MalformedRow);
    EXPECT_EQ(detail_of(kHeader + "2019-01-02,1,1,1,1,1,1\n2019-01-03,1,1,1,1,1,1.5\n"), 3);
}

TEST(ParseCsv, EmptyInputs)
{
    EXPECT_EQ(kind_of(""), ErrorKind::EmptyInput);
    EXPECT_EQ(kind_of(kHeader), ErrorKind::EmptyInput);
}

TEST(ParseCsv, CrlfAndMissingAdjClose)
{
    const Series s = parse_csv("Date,Open,High,Low,Close,Adj Close,Volume\r\n2019-01-02,1,2,0.5,1.5,,7\r\n");
    ASSERT_EQ(s.size(), 1u);
    EXPECT_FALSE(s.bars[0].adj_close.has_value());
    EXPECT_EQ(s.bars[0].volume, 7u);
}

TEST(Validate, CleanFixtureHasNoViolations) { EXPECT_TRUE(validate(parse_csv(kFixture)).empty()); }

TEST(Validate, CloseAboveHigh)
{
    Series s = parse_csv(kFixture);
    s.bars[1].close = 107;
    const auto v = validate(s);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].bar_index, 1u);
    EXPECT_EQ(v[0].rule, rules::kHighAboveBody);
}

TEST(Validate, BruteForceAgreement)
{
    Rng rng(7);
    for (int trial = 0; trial < 2000; ++trial) {
        Series s;
        s.bars.push_back(Bar{make_date(2020, 1, 1), rng.uniform(-1, 3), rng.uniform(-1, 3), rng.uniform(-1, 3),
                             rng.uniform(-1, 3), std::nullopt, 0});
        const Bar& b = s.bars[0];
        const bool clean = b.high >= std::max(b.open, b.close) && b.low <= std::min(b.open, b.close) &&
                           b.high >= b.low && b.open > 0 && b.high > 0 && b.low > 0 && b.close > 0;
        EXPECT_EQ(validate(s).empty(), clean);
    }
}

TEST(SerializeCsv, RoundTripOnRandomSeries)
{
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Series s = testing_support::random_walk(50 + seed, seed);
        if (seed % 3 == 0) s.bars[seed].adj_close.reset();
        const Series back = parse_csv(serialize_csv(s), s.ticker);
        EXPECT_EQ(back.bars, s.bars);
    }
}

TEST(LoadCsv, MissingFileIsIoError)
{
    try {
        load_csv("/nonexistent/nowhere.csv", "X");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Io);
    }
}

using testing_support::MockServer;

TEST(FetchRemote, PassThroughEqualsParse)
{
    MockServer server({{"ABC", kFixture}});
    const Series s = fetch_remote("ABC", make_date(2019, 1, 1), make_date(2019, 12, 31), server.endpoint());
    const Series expected = parse_csv(kFixture, "ABC");
    EXPECT_EQ(s.bars, expected.bars);
    EXPECT_EQ(s.ticker, "ABC");
    EXPECT_EQ(server.last_query(), "ABC|2019-01-01|2019-12-31");
}

TEST(FetchRemote, NotFoundIsHttpStatus)
{
    MockServer server({{"ABC", kFixture}});
    try {
        fetch_remote("MISSING", make_date(2019, 1, 1), make_date(2019, 12, 31), server.endpoint());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::HttpStatus);
        EXPECT_EQ(e.detail(), 404);
    }
}

TEST(FetchRemote, RowsOutsideRangeExcluded)
{
    MockServer server({{"ABC", kFixture}});
    const Date start = make_date(2019, 1, 3);
    const Date end = make_date(2019, 1, 3);
    const Series s = fetch_remote("ABC", start, end, server.endpoint());
    std::vector<Bar> expected;
    for (const Bar& b : parse_csv(kFixture).bars) {
        if (b.date >= start && b.date <= end) expected.push_back(b);
    }
    EXPECT_EQ(s.bars, expected);
}

TEST(FetchRemote, UnreachableIsNetworkError)
{
    // Grab a free port, then close it so connecting is refused.
    int port = 0;
    {
        const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        ASSERT_EQ(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr), 0);
        socklen_t len = sizeof addr;
        ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
        port = ntohs(addr.sin_port);
        ::close(fd);
    }
    try {
        fetch_remote("ABC", make_date(2019, 1, 1), make_date(2019, 12, 31),
                     "http://127.0.0.1:" + std::to_string(port) + "/download");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NetworkError);
    }
}

TEST(FetchRemote, BadBodyIsParseError)
{
    MockServer server(std::map<std::string, std::string>{{"ABC", "not a csv\n"}});
    try {
        fetch_remote("ABC", make_date(2019, 1, 1), make_date(2019, 12, 31), server.endpoint());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MalformedRow);
    }
}
