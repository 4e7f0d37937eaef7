// Serves a JSONL corpus over the feed/post HTTP contract so the crawler can
// be exercised end to end without a live platform:
//   GET /feed/{top|new|discussed}?cursor=N  -> {post_ids, next_cursor, has_more}
//   GET /post/{id}                          -> the post record
// Optional flaky mode fails the first attempt at each /post URL with a 503,
// which exercises the crawler's retry path.

#include <httplib.h>

#include "moltpipe/record.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <mutex>
#include <string>

using moltpipe::Json;
using moltpipe::PostRecord;

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: moltpipe-mock-server CORPUS.jsonl PORT [--page-size N] [--flaky]\n";
        return 2;
    }
    const std::string corpus_path = argv[1];
    const int port = std::stoi(argv[2]);
    std::size_t page_size = 10;
    bool flaky = false;
    for (int i = 3; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--page-size" && i + 1 < argc) page_size = std::stoul(argv[++i]);
        else if (arg == "--flaky") flaky = true;
    }

    moltpipe::Corpus corpus;
    try {
        corpus = moltpipe::read_corpus(corpus_path);
    } catch (const std::exception& e) {
        std::cerr << "cannot load corpus: " << e.what() << '\n';
        return 2;
    }

    std::map<std::string, const PostRecord*> by_id;
    for (const auto& p : corpus.posts) by_id[p.post_id] = &p;

    auto ordered_ids = [&](const std::string& feed) {
        std::vector<const PostRecord*> posts;
        for (const auto& p : corpus.posts) posts.push_back(&p);
        std::stable_sort(posts.begin(), posts.end(), [&](const PostRecord* a, const PostRecord* b) {
            if (feed == "new") return a->created_at_epoch > b->created_at_epoch;
            if (feed == "discussed")
                return moltpipe::count_comments(*a) > moltpipe::count_comments(*b);
            return a->upvotes - a->downvotes > b->upvotes - b->downvotes;
        });
        std::vector<std::string> ids;
        for (const auto* p : posts) ids.push_back(p->post_id);
        return ids;
    };
    std::map<std::string, std::vector<std::string>> feeds;
    for (const char* f : {"top", "new", "discussed"}) feeds[f] = ordered_ids(f);

    std::mutex mu;
    std::map<std::string, int> hit_counts;

    httplib::Server server;
    server.Get(R"(/feed/(top|new|discussed))",
               [&](const httplib::Request& req, httplib::Response& res) {
                   const auto& ids = feeds[req.matches[1]];
                   std::size_t offset = 0;
                   if (req.has_param("cursor")) {
                       try {
                           offset = std::stoul(req.get_param_value("cursor"));
                       } catch (...) {
                           res.status = 400;
                           return;
                       }
                   }
                   const std::size_t end = std::min(offset + page_size, ids.size());
                   Json page;
                   page["post_ids"] = Json::array();
                   for (std::size_t i = offset; i < end; ++i) page["post_ids"].push_back(ids[i]);
                   page["has_more"] = end < ids.size();
                   page["next_cursor"] = end < ids.size() ? std::to_string(end) : "";
                   res.set_content(page.dump(), "application/json");
               });
    server.Get(R"(/post/(.+))", [&](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        if (flaky) {
            std::lock_guard<std::mutex> lock(mu);
            if (hit_counts[id]++ == 0) {
                res.status = 503;
                return;
            }
        }
        auto it = by_id.find(id);
        if (it == by_id.end()) {
            res.status = 404;
            return;
        }
        res.set_content(moltpipe::serialize_post(*it->second), "application/json");
    });

    std::cerr << "serving " << corpus.posts.size() << " posts on port " << port
              << " (page size " << page_size << (flaky ? ", flaky" : "") << ")\n";
    if (!server.listen("127.0.0.1", port)) {
        std::cerr << "listen failed on port " << port << '\n';
        return 1;
    }
    return 0;
}
