#include "emscore/batch.hpp"

#include <algorithm>
#include <exception>
#include <optional>
#include <thread>

#include "emscore/error.hpp"

namespace emscore::cli {

ScoreReport score_one(const Archive& archive, const std::string& caption_id, const std::string& video_id,
                      const std::vector<std::string>* reference_ids, const BatchConfig& config) {
  const auto& caption = archive.caption(caption_id);
  const auto& video = archive.video(video_id);
  if (config.mode == Mode::kEmscore) return emscore(caption, video, config.idf, config.options);

  if (reference_ids == nullptr || reference_ids->empty()) {
    throw Error(ErrorCode::kNoReferences, "no references for caption '" + caption_id + "' / video '" + video_id + "'");
  }
  std::vector<CaptionRef> refs;
  refs.reserve(reference_ids->size());
  for (const auto& id : *reference_ids) refs.emplace_back(archive.caption(id));
  return emscore_ref(caption, video, refs, config.idf, config.options);
}

std::vector<ScoreReport> score_pairs(const Archive& archive, const std::vector<ScorePair>& pairs,
                                     const BatchConfig& config) {
  const auto refs_for = [&config](const std::string& video_id) -> const std::vector<std::string>* {
    if (config.references == nullptr) return nullptr;
    const auto it = config.references->find(video_id);
    return it == config.references->end() ? nullptr : &it->second;
  };

  std::vector<std::optional<ScoreReport>> results(pairs.size());
  std::vector<std::exception_ptr> errors(pairs.size());

  const auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        results[i] = score_one(archive, pairs[i].caption_id, pairs[i].video_id, refs_for(pairs[i].video_id), config);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const auto jobs = std::clamp<std::size_t>(config.jobs, 1, std::max<std::size_t>(pairs.size(), 1));
  if (jobs == 1) {
    work(0, pairs.size());
  } else {
    std::vector<std::jthread> workers;
    const auto chunk = (pairs.size() + jobs - 1) / jobs;
    for (std::size_t begin = 0; begin < pairs.size(); begin += chunk) {
      workers.emplace_back(work, begin, std::min(begin + chunk, pairs.size()));
    }
  }

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<ScoreReport> out;
  out.reserve(pairs.size());
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

}  // namespace emscore::cli
