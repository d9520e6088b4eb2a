#pragma once

namespace geognn {

/// Keeps large matrix buffers on the heap instead of fresh mmap pages.
/// Training allocates and frees the same few-MB tapes every batch; with the
/// default glibc thresholds each one page-faults anew. No-op elsewhere.
void tune_allocator();

} // namespace geognn
