#include "mflab/harness/task_data.hpp"

#include <algorithm>

#include "mflab/enc/analysis.hpp"
#include "mflab/enc/corpus.hpp"
#include "mflab/harness/streams.hpp"

namespace mflab::harness {

TaskData::TaskData(const ExperimentConfig& cfg) : task_(cfg.task) {
  cfg.validate();
  if (task_.kind == TaskKind::gaussian) {
    data_dim_ = task_.gaussian.dim();
    cond_dim_ = cfg.embedding.synthetic.dim;
    conditions_.push_back({"c0", Tensor::full(1, cond_dim_, 0.0), true});
    tuples_.push_back({0});
    train_idx_.push_back(0);
    return;
  }

  data_dim_ = task_.mixture.data_dim;
  tuples_ = task_.mixture.conditions();
  if (cfg.embedding.corpus_path.empty()) {
    table_ = enc::gen_synthetic_embeddings(cfg.embedding.synthetic, stream_seed(cfg.seed, Stream::embeddings));
    cond_dim_ = cfg.embedding.synthetic.dim;
    for (const auto& e : table_->entries) conditions_.push_back({e.id, Tensor::row(e.psi), true});
  } else {
    const enc::Corpus corpus = enc::load_corpus(cfg.embedding.corpus_path);
    cond_dim_ = corpus.dims().token_dim;
    for (const auto& tuple : tuples_) {
      const std::string id = condition_id(tuple);
      const auto& rec = corpus.by_id(id);
      conditions_.push_back({id, Tensor::row(enc::mean_pool(rec.token_embeddings)), true});
    }
  }
  for (std::size_t c = 0; c < conditions_.size(); ++c) {
    auto& entry = conditions_[c];
    entry.trained = std::find(task_.held_out.begin(), task_.held_out.end(), entry.id) == task_.held_out.end();
    if (entry.trained) train_idx_.push_back(c);
  }
}

const flow::CompositionalMixture& TaskData::layout() const {
  if (!is_mixture()) throw ValidationError("task has no mixture layout");
  return task_.mixture;
}

net::NetDims TaskData::net_dims(const ExperimentConfig& cfg) const {
  return net::NetDims{data_dim_, cond_dim_, cfg.hidden_dim, cfg.depth};
}

std::size_t TaskData::index_of(const std::string& id) const {
  for (std::size_t c = 0; c < conditions_.size(); ++c)
    if (conditions_[c].id == id) return c;
  throw ValidationError("unknown condition id '" + id + "'");
}

Tensor TaskData::sample(std::size_t condition, std::size_t n, num::Rng& rng) const {
  if (condition >= conditions_.size()) throw ValidationError("condition index out of range");
  if (!is_mixture()) return task_.gaussian.sample(n, rng);
  return task_.mixture.sample_component(tuples_[condition], n, rng);
}

flow::TrainBatch TaskData::draw_batch(std::size_t batch, num::Rng& rng, double progress,
                                      const flow::ScheduleConfig& sched, bool pairs) const {
  flow::TrainBatch b{Tensor({batch, data_dim_}), Tensor(), Tensor({batch, cond_dim_}), Tensor({batch, 1}),
                     Tensor({batch, 1})};
  for (std::size_t i = 0; i < batch; ++i) {
    const std::size_t c = train_idx_[rng.below(train_idx_.size())];
    const Tensor x = sample(c, 1, rng);
    std::copy(x.data().begin(), x.data().end(), b.x.row_span(i).begin());
    const auto psi = conditions_[c].psi.data();
    std::copy(psi.begin(), psi.end(), b.psi.row_span(i).begin());
  }
  b.eps = rng.normal_tensor({batch, data_dim_});
  for (std::size_t i = 0; i < batch; ++i) {
    if (pairs) {
      const flow::TimePair tp = flow::sample_timepair(rng, progress, sched);
      b.t[i] = tp.t;
      b.r[i] = tp.r;
    } else {
      b.t[i] = b.r[i] = flow::sample_time(rng, progress, sched);
    }
  }
  return b;
}

}  // namespace mflab::harness
