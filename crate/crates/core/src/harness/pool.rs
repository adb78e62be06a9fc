use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Runs `tasks` on at most `jobs` threads and returns their results in
/// task order.
pub fn run_ordered<T, F>(jobs: usize, tasks: Vec<F>) -> Vec<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    let n = tasks.len();
    let tasks: Vec<Mutex<Option<F>>> = tasks.into_iter().map(|t| Mutex::new(Some(t))).collect();
    let slots: Vec<Mutex<Option<T>>> = (0..n).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let work = || loop {
        let i = next.fetch_add(1, Ordering::Relaxed);
        if i >= n {
            break;
        }
        let task = tasks[i].lock().expect("task").take().expect("task taken once");
        let out = task();
        *slots[i].lock().expect("slot") = Some(out);
    };
    std::thread::scope(|s| {
        for _ in 1..jobs.clamp(1, n.max(1)) {
            s.spawn(work);
        }
        work();
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().expect("slot").expect("every task ran"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_kept() {
        let tasks: Vec<_> = (0..20u64)
            .map(|i| move || {
                std::thread::sleep(std::time::Duration::from_millis((20 - i) % 3));
                i * i
            })
            .collect();
        let out = run_ordered(4, tasks);
        assert_eq!(out, (0..20u64).map(|i| i * i).collect::<Vec<_>>());
        assert!(run_ordered(3, Vec::<fn() -> u8>::new()).is_empty());
    }
}
