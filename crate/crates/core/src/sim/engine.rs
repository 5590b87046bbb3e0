//! Discrete-event core: a time-ordered queue with insertion-order ties.

use alloc::collections::BinaryHeap;
use core::cmp::Ordering;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EngineError {
    /// An event was scheduled before the current time.
    ScheduledInPast { now: f64, at: f64 },
    /// `run_until` was asked to go backwards.
    EndBeforeNow { now: f64, end: f64 },
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::ScheduledInPast { now, at } => {
                write!(f, "event scheduled at {at} but clock is at {now}")
            }
            EngineError::EndBeforeNow { now, end } => {
                write!(f, "run_until({end}) with clock at {now}")
            }
        }
    }
}

struct Entry<E> {
    time: f64,
    seq: u64,
    event: E,
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<E> Eq for Entry<E> {}
impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<E> Ord for Entry<E> {
    // Reversed: the heap pops the earliest (time, seq) first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.seq.cmp(&self.seq))
    }
}

pub struct EventQueue<E> {
    heap: BinaryHeap<Entry<E>>,
    now: f64,
    next_seq: u64,
}

impl<E> Default for EventQueue<E> {
    fn default() -> Self {
        Self::new(0.0)
    }
}

impl<E> EventQueue<E> {
    pub fn new(start: f64) -> Self {
        Self {
            heap: BinaryHeap::new(),
            now: start,
            next_seq: 0,
        }
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Returns the sequence number given to the event.
    pub fn schedule(&mut self, at: f64, event: E) -> Result<u64, EngineError> {
        if !(at >= self.now) {
            return Err(EngineError::ScheduledInPast { now: self.now, at });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Entry {
            time: at,
            seq,
            event,
        });
        Ok(seq)
    }

    pub fn schedule_in(&mut self, delay: f64, event: E) -> Result<u64, EngineError> {
        self.schedule(self.now + delay, event)
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.heap.peek().map(|e| e.time)
    }

    /// Removes the next event and advances the clock to it.
    pub fn pop(&mut self) -> Option<(f64, E)> {
        let e = self.heap.pop()?;
        self.now = e.time;
        Some((e.time, e.event))
    }

    /// Processes every event with time `<= end`, then sets the clock to
    /// `end`. The handler may schedule further events.
    pub fn run_until<H>(&mut self, end: f64, mut handler: H) -> Result<(), EngineError>
    where
        H: FnMut(&mut Self, f64, E) -> Result<(), EngineError>,
    {
        if end < self.now {
            return Err(EngineError::EndBeforeNow { now: self.now, end });
        }
        while self.peek_time().is_some_and(|t| t <= end) {
            let (t, e) = self.pop().expect("peeked");
            handler(self, t, e)?;
        }
        self.now = end;
        Ok(())
    }

    /// Processes events until the queue is empty.
    pub fn run<H>(&mut self, mut handler: H) -> Result<(), EngineError>
    where
        H: FnMut(&mut Self, f64, E) -> Result<(), EngineError>,
    {
        while let Some((t, e)) = self.pop() {
            handler(self, t, e)?;
        }
        Ok(())
    }

    /// Drops every pending event.
    pub fn clear(&mut self) {
        self.heap.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn empty_queue_jumps_to_end() {
        let mut q: EventQueue<u32> = EventQueue::new(0.0);
        q.run_until(5.0, |_, _, _| Ok(())).unwrap();
        assert_eq!(q.now(), 5.0);
    }

    #[test]
    fn equal_times_keep_insertion_order() {
        let mut q = EventQueue::new(0.0);
        for i in 0..5u32 {
            q.schedule(1.0, i).unwrap();
        }
        q.schedule(0.5, 99).unwrap();
        let mut seen = Vec::new();
        q.run_until(2.0, |_, _, e| {
            seen.push(e);
            Ok(())
        })
        .unwrap();
        assert_eq!(seen, [99, 0, 1, 2, 3, 4]);
    }

    #[test]
    fn past_events_are_rejected() {
        let mut q = EventQueue::new(0.0);
        q.schedule(1.0, ()).unwrap();
        q.pop();
        assert!(matches!(
            q.schedule(0.5, ()),
            Err(EngineError::ScheduledInPast { .. })
        ));
        assert!(q.run_until(0.1, |_, _, _| Ok(())).is_err());
    }

    #[test]
    fn handlers_can_schedule() {
        let mut q = EventQueue::new(0.0);
        q.schedule(0.0, 0u32).unwrap();
        let mut count = 0;
        q.run_until(10.0, |q, _, n| {
            count += 1;
            if n < 3 {
                q.schedule_in(1.0, n + 1)?;
            }
            Ok(())
        })
        .unwrap();
        assert_eq!(count, 4);
    }
}
