use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

/// Tracks live and peak bytes of vertex buffers.
#[derive(Debug, Clone, Default)]
pub struct MemoryTracker {
    inner: Arc<Inner>,
}

#[derive(Debug, Default)]
struct Inner {
    current: AtomicU64,
    peak: AtomicU64,
}

impl MemoryTracker {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers `bytes` as live until the returned guard drops.
    pub fn track(&self, bytes: u64) -> MemoryGuard {
        let now = self.inner.current.fetch_add(bytes, Ordering::SeqCst) + bytes;
        self.inner.peak.fetch_max(now, Ordering::SeqCst);
        MemoryGuard { tracker: self.clone(), bytes }
    }

    pub fn current(&self) -> u64 {
        self.inner.current.load(Ordering::SeqCst)
    }

    pub fn peak(&self) -> u64 {
        self.inner.peak.load(Ordering::SeqCst)
    }
}

#[derive(Debug)]
pub struct MemoryGuard {
    tracker: MemoryTracker,
    bytes: u64,
}

impl Drop for MemoryGuard {
    fn drop(&mut self) {
        self.tracker.inner.current.fetch_sub(self.bytes, Ordering::SeqCst);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_survives_release() {
        let t = MemoryTracker::new();
        let a = t.track(100);
        {
            let _b = t.track(50);
            assert_eq!(t.current(), 150);
        }
        drop(a);
        let _c = t.track(10);
        assert_eq!(t.current(), 10);
        assert_eq!(t.peak(), 150);
    }
}
