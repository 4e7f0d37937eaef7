#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "moltpipe/crawl.hpp"
#include "moltpipe/record.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <set>
#include <thread>

using namespace moltpipe;

namespace {

// Simulated clock: sleep advances time instantly. Thread-safe because batch
// workers sleep during retry backoff.
class SimClock : public Clock {
public:
    std::int64_t now_ms() override {
        std::lock_guard<std::mutex> lock(mu_);
        return now_;
    }
    void sleep_ms(std::int64_t ms) override {
        std::lock_guard<std::mutex> lock(mu_);
        now_ += ms;
    }

private:
    std::mutex mu_;
    std::int64_t now_ = 0;
};

PostRecord fixture_post(int i) {
    PostRecord p;
    p.post_id = "post" + std::to_string(i);
    p.title = "Post " + std::to_string(i);
    p.content = "Body of post " + std::to_string(i);
    p.upvotes = 100 - i;
    p.created_at_epoch = 1747200000 + i * 3600;
    p.created_at = format_iso8601(p.created_at_epoch);
    p.submolt_id = "s1";
    p.submolt_name = "general";
    p.author_id = "u" + std::to_string(i % 5);
    p.author_name = "agent_" + std::to_string(i % 5);
    return p;
}

// Serves the feed/post contract from an in-memory corpus, with optional
// scripted failures. Tracks concurrency and request ordering.
class MockClient : public HttpClient {
public:
    explicit MockClient(int n_posts, std::size_t page_size = 10)
        : page_size_(page_size) {
        for (int i = 0; i < n_posts; ++i) posts_.push_back(fixture_post(i));
    }

    // url -> number of leading attempts that fail with this status.
    std::map<std::string, std::pair<int, int>> scripted_failures;  // url -> {count, status}

    HttpResponse get(const std::string& url,
                     const std::vector<std::pair<std::string, std::string>>& headers) override {
        {
            std::lock_guard<std::mutex> lock(mu_);
            ++total_requests_;
            ++in_flight_;
            max_in_flight_ = std::max(max_in_flight_, in_flight_);
            last_headers_ = headers;
            requested_urls_.push_back(url);
        }
        // Give genuinely concurrent workers a chance to overlap.
        std::this_thread::yield();
        HttpResponse res = serve(url);
        {
            std::lock_guard<std::mutex> lock(mu_);
            --in_flight_;
        }
        return res;
    }

    int max_in_flight() const { return max_in_flight_; }
    int total_requests() const { return total_requests_; }
    const std::vector<std::string>& requested_urls() const { return requested_urls_; }
    const std::vector<std::pair<std::string, std::string>>& last_headers() const {
        return last_headers_;
    }

    std::map<std::string, std::string> cursor_override;  // page key -> forced next_cursor

private:
    HttpResponse serve(const std::string& url) {
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = scripted_failures.find(url);
            if (it != scripted_failures.end() && it->second.first > 0) {
                --it->second.first;
                return {it->second.second, "", it->second.second == 0 ? "connection reset" : ""};
            }
        }
        const std::string feed_prefix = "http://mock/feed/";
        const std::string post_prefix = "http://mock/post/";
        if (url.rfind(feed_prefix, 0) == 0) {
            std::string rest = url.substr(feed_prefix.size());
            std::size_t offset = 0;
            const auto q = rest.find("?cursor=");
            std::string feed = rest;
            if (q != std::string::npos) {
                feed = rest.substr(0, q);
                offset = std::stoul(rest.substr(q + 8));
            }
            auto over = cursor_override.find(feed + "@" + std::to_string(offset));
            const std::size_t end = std::min(offset + page_size_, posts_.size());
            Json page;
            page["post_ids"] = Json::array();
            for (std::size_t i = offset; i < end; ++i)
                page["post_ids"].push_back(posts_[i].post_id);
            page["has_more"] = end < posts_.size();
            page["next_cursor"] = over != cursor_override.end()
                                      ? over->second
                                      : (end < posts_.size() ? std::to_string(end) : "");
            return {200, page.dump(), ""};
        }
        if (url.rfind(post_prefix, 0) == 0) {
            const std::string id = url.substr(post_prefix.size());
            for (const auto& p : posts_)
                if (p.post_id == id) return {200, serialize_post(p), ""};
            return {404, "", ""};
        }
        return {400, "", ""};
    }

    std::vector<PostRecord> posts_;
    std::size_t page_size_;
    std::mutex mu_;
    int in_flight_ = 0;
    int max_in_flight_ = 0;
    int total_requests_ = 0;
    std::vector<std::string> requested_urls_;
    std::vector<std::pair<std::string, std::string>> last_headers_;
};

CrawlConfig mock_config() {
    CrawlConfig cfg;
    cfg.base_url = "http://mock";
    cfg.batch_size = 4;
    cfg.inter_batch_delay_ms = 1000;
    cfg.max_retries = 3;
    return cfg;
}

std::string corpus_bytes(const Corpus& corpus) {
    std::string out;
    for (const auto& p : corpus.posts) out += serialize_post(p) + "\n";
    return out;
}

}  // namespace

TEST_CASE("paginate_feed walks cursors to exhaustion and deduplicates") {
    MockClient client(25, 10);
    SimClock clock;
    auto ids = paginate_feed(Feed::Top, mock_config(), client, clock);
    REQUIRE(ids.size() == 25);
    std::set<std::string> unique(ids.begin(), ids.end());
    CHECK(unique.size() == 25);
    CHECK(ids[0] == "post0");
    // 3 pages of 10/10/5.
    CHECK(client.total_requests() == 3);
}

TEST_CASE("paginate_feed aborts on a repeated cursor") {
    MockClient client(25, 10);
    client.cursor_override["top@10"] = "10";  // page 2 points back at itself
    SimClock clock;
    try {
        paginate_feed(Feed::Top, mock_config(), client, clock);
        FAIL("expected CrawlError");
    } catch (const CrawlError& e) {
        CHECK(e.kind == CrawlError::Kind::CursorLoop);
    }
}

TEST_CASE("malformed feed page raises") {
    MockClient client(5, 10);
    client.scripted_failures["http://mock/feed/top"] = {1, 200};  // status 200, empty body
    SimClock clock;
    CHECK_THROWS_AS(paginate_feed(Feed::Top, mock_config(), client, clock), CrawlError);
}

TEST_CASE("fetch_post retries transient 503s with exponential sim-time backoff") {
    MockClient client(5);
    client.scripted_failures["http://mock/post/post1"] = {2, 503};
    SimClock clock;
    CrawlLog log;
    PostRecord p = fetch_post("post1", mock_config(), client, clock, &log);
    CHECK(p.post_id == "post1");
    CHECK(log.retries == 2);
    // Two backoffs: 500ms and 1000ms, each within +-20% jitter.
    const std::int64_t elapsed = clock.now_ms();
    CHECK(elapsed >= 400 + 800);
    CHECK(elapsed <= 600 + 1200);
}

TEST_CASE("fetch_post gives up after max_retries and 404 is not retried") {
    MockClient client(5);
    client.scripted_failures["http://mock/post/post1"] = {10, 503};
    SimClock clock;
    CHECK_THROWS_AS(fetch_post("post1", mock_config(), client, clock), CrawlError);
    CHECK(client.total_requests() == 4);  // initial + 3 retries

    MockClient client2(5);
    SimClock clock2;
    CHECK_THROWS_AS(fetch_post("missing", mock_config(), client2, clock2), CrawlError);
    CHECK(client2.total_requests() == 1);
}

TEST_CASE("crawl rate contract: <=4 in flight, batch starts >= 1s apart") {
    MockClient client(40, 10);
    SimClock clock;
    CrawlResult result = crawl(mock_config(), client, clock);
    REQUIRE(result.corpus.posts.size() == 40);
    CHECK_FALSE(result.partial);
    CHECK(client.max_in_flight() <= 4);
    std::vector<std::int64_t> batch_times;
    for (const auto& e : result.log.events)
        if (e.kind == "batch") batch_times.push_back(e.time_ms);
    REQUIRE(batch_times.size() == 10);  // 40 posts / batch of 4
    for (std::size_t i = 1; i < batch_times.size(); ++i)
        CHECK(batch_times[i] - batch_times[i - 1] >= 1000);
}

TEST_CASE("crawl output is byte-identical across runs") {
    auto run_once = [] {
        MockClient client(40, 10);
        SimClock clock;
        return corpus_bytes(crawl(mock_config(), client, clock).corpus);
    };
    const std::string a = run_once();
    const std::string b = run_once();
    CHECK(a == b);
    CHECK_FALSE(a.empty());
}

TEST_CASE("crawl sorts by (created_at_epoch, post_id) and merges feeds deduplicated") {
    MockClient client(15, 4);
    SimClock clock;
    CrawlResult result = crawl(mock_config(), client, clock);
    REQUIRE(result.corpus.posts.size() == 15);
    for (std::size_t i = 1; i < result.corpus.posts.size(); ++i) {
        const auto& a = result.corpus.posts[i - 1];
        const auto& b = result.corpus.posts[i];
        CHECK((a.created_at_epoch < b.created_at_epoch ||
               (a.created_at_epoch == b.created_at_epoch && a.post_id < b.post_id)));
    }
    // Every post appears once even though three feeds list the same ids.
    std::set<std::string> ids;
    for (const auto& p : result.corpus.posts) ids.insert(p.post_id);
    CHECK(ids.size() == 15);
}

TEST_CASE("crawl window filter and partial flag on hard failures") {
    CrawlConfig cfg = mock_config();
    // Posts are spaced hourly from 2025-05-14T05:20:00Z (post0).
    cfg.window_start = format_iso8601(1747200000 + 2 * 3600);  // drops post0, post1
    cfg.window_end = format_iso8601(1747200000 + 8 * 3600);    // keeps through post7
    MockClient client(10, 10);
    SimClock clock;
    CrawlResult r = crawl(cfg, client, clock);
    REQUIRE(r.corpus.posts.size() == 6);  // post2..post7
    CHECK(r.corpus.posts.front().post_id == "post2");
    CHECK(r.corpus.posts.back().post_id == "post7");
    CHECK_FALSE(r.partial);  // window skips are not failures
    CHECK(r.corpus.meta.window_start == cfg.window_start);

    MockClient flaky(10, 10);
    flaky.scripted_failures["http://mock/post/post3"] = {10, 503};
    SimClock clock2;
    CrawlResult r2 = crawl(mock_config(), flaky, clock2);
    CHECK(r2.partial);
    CHECK(r2.log.skipped == 1);
    CHECK(r2.corpus.posts.size() == 9);
}

TEST_CASE("bearer token off by default, sent when configured") {
    MockClient client(3, 10);
    SimClock clock;
    CrawlConfig cfg = mock_config();
    crawl(cfg, client, clock);
    for (const auto& [k, v] : client.last_headers()) CHECK(k != "Authorization");

    MockClient client2(3, 10);
    SimClock clock2;
    cfg.bearer_token = "tok123";
    crawl(cfg, client2, clock2);
    bool saw = false;
    for (const auto& [k, v] : client2.last_headers())
        if (k == "Authorization" && v == "Bearer tok123") saw = true;
    CHECK(saw);
}

TEST_CASE("retry jitter is deterministic for a fixed seed") {
    auto elapsed_for = [](std::uint64_t seed) {
        MockClient client(5);
        client.scripted_failures["http://mock/post/post2"] = {3, 503};
        SimClock clock;
        CrawlConfig cfg = mock_config();
        cfg.retry_jitter_seed = seed;
        CrawlLog log;
        fetch_post("post2", cfg, client, clock, &log);
        return clock.now_ms();
    };
    CHECK(elapsed_for(7) == elapsed_for(7));
    // Different seeds shift the jitter (overwhelmingly likely for FNV).
    CHECK(elapsed_for(7) != elapsed_for(8));
}
