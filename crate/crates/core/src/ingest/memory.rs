use std::fs;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

pub const SAMPLE_INTERVAL: Duration = Duration::from_millis(100);

fn status_kib(key: &str) -> Option<u64> {
    let status = fs::read_to_string("/proc/self/status").ok()?;
    status
        .lines()
        .find_map(|l| l.strip_prefix(key))
        .and_then(|rest| rest.trim().trim_end_matches("kB").trim().parse().ok())
        .map(|kib: u64| kib * 1024)
}

/// Current resident set size in bytes, if the platform exposes it.
pub fn current_rss() -> Option<u64> {
    status_kib("VmRSS:")
}

/// Kernel-tracked resident high-water mark of this process.
pub fn peak_rss() -> Option<u64> {
    status_kib("VmHWM:")
}

/// Background thread recording the largest RSS seen at a fixed interval.
pub struct MemorySampler {
    stop: Arc<AtomicBool>,
    peak: Arc<AtomicU64>,
    handle: Option<JoinHandle<()>>,
}

impl MemorySampler {
    pub fn start(interval: Duration) -> Self {
        let stop = Arc::new(AtomicBool::new(false));
        let peak = Arc::new(AtomicU64::new(current_rss().unwrap_or(0)));
        let handle = {
            let (stop, peak) = (stop.clone(), peak.clone());
            thread::Builder::new()
                .name("rss-sampler".into())
                .spawn(move || {
                    while !stop.load(Ordering::Relaxed) {
                        if let Some(rss) = current_rss() {
                            peak.fetch_max(rss, Ordering::Relaxed);
                        }
                        thread::park_timeout(interval);
                    }
                })
                .ok()
        };
        MemorySampler { stop, peak, handle }
    }

    pub fn peak(&self) -> u64 {
        self.peak.load(Ordering::Relaxed)
    }

    /// Stops sampling and returns the peak, folded with the kernel's own
    /// high-water mark when available.
    pub fn finish(mut self) -> u64 {
        self.shutdown();
        let sampled = self.peak();
        peak_rss().map_or(sampled, |hwm| hwm.max(sampled))
    }

    fn shutdown(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(h) = self.handle.take() {
            h.thread().unpark();
            let _ = h.join();
        }
    }
}

impl Drop for MemorySampler {
    fn drop(&mut self) {
        self.shutdown();
    }
}
