#include "pumsim/system.hpp"

#include <cmath>
#include <utility>

namespace pumsim {

System::System(SimConfig cfg, TraceSink* sink)
    : cfg_(std::move(cfg)),
      clock_(cfg_.controller.cpu_period_ns),
      meter_{clock_, ledger_} {
  cfg_.validate();
  device_ = std::make_unique<DramDevice>(cfg_.device);
  ctrl_ = std::make_unique<MemController>(*device_, cfg_.controller, sink);
  poc_ = std::make_unique<Poc>(*ctrl_, meter_, cfg_.poc);
  cache_ = std::make_unique<Cache>(cfg_.cache, *ctrl_, meter_);
  pumolib_ = std::make_unique<Pumolib>(*poc_, meter_, cfg_.pumolib);
  supervisor_ =
      std::make_unique<Supervisor>(*ctrl_, *cache_, *pumolib_, meter_, cfg_.supervisor);

  auto cns = [](double ns) { return uint32_t(std::lround(ns * 100.0)); };
  Crf& crf = ctrl_->crf();
  crf.write(Crf::violated_trcd_cns, cns(cfg_.violated_trcd_ns));
  crf.write(Crf::violated_tras_cns, cns(cfg_.violated_tras_ns));
  crf.write(Crf::violated_trp_cns, cns(cfg_.violated_trp_ns));
  crf.write(Crf::trng_period_ns, uint32_t(std::lround(cfg_.trng_period_ns)));
  ctrl_->advance_to(clock_.now_ns());
}

}  // namespace pumsim
