#pragma once

namespace mixsei {

// Version string stamped into every dataset manifest, checkpoint and report.
const char* version();

}  // namespace mixsei
