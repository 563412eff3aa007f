//! Slot-indexed parallel map for bulk per-image work (transform export, PCA
//! input preparation). Every index writes its own output slot, so the worker
//! count — capped by the DDA_THREADS environment variable — can never change
//! a result byte.

use std::sync::atomic::{AtomicUsize, Ordering};

/// Worker count: min(available cores, 4), capped by DDA_THREADS when set.
pub fn worker_count() -> usize {
    let cores = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let base = cores.min(4).max(1);
    match std::env::var("DDA_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        Some(cap) if cap >= 1 => base.min(cap),
        _ => base,
    }
}

/// Applies `f` to 0..n across `workers` threads, collecting results in index
/// order.
pub fn pmap<T, F>(n: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = workers.max(1).min(n.max(1));
    let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
    if workers <= 1 {
        for (i, slot) in slots.iter_mut().enumerate() {
            *slot = Some(f(i));
        }
    } else {
        let next = AtomicUsize::new(0);
        let slot_ptr = SlotSlice(slots.as_mut_ptr());
        std::thread::scope(|scope| {
            for _ in 0..workers {
                let next = &next;
                let f = &f;
                let slot_ptr = &slot_ptr;
                scope.spawn(move || loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= n {
                        break;
                    }
                    let value = f(i);
                    // Each index is claimed exactly once via fetch_add, so
                    // this write is the only access to slot i.
                    unsafe { *slot_ptr.0.add(i) = Some(value) };
                });
            }
        });
    }
    slots.into_iter().map(|s| s.unwrap()).collect()
}

struct SlotSlice<T>(*mut Option<T>);
unsafe impl<T: Send> Sync for SlotSlice<T> {}
