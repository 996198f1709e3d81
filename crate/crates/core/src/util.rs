/// Odometer over index tuples `0..sizes[0] × 0..sizes[1] × …`, last position
/// fastest. An empty size list yields one empty tuple.
pub(crate) struct Tuples {
    sizes: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Tuples {
    pub(crate) fn new(sizes: Vec<usize>) -> Tuples {
        let next = if sizes.contains(&0) {
            None
        } else {
            Some(vec![0; sizes.len()])
        };
        Tuples { sizes, next }
    }
}

impl Iterator for Tuples {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        let mut i = succ.len();
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            succ[i] += 1;
            if succ[i] < self.sizes[i] {
                self.next = Some(succ);
                break;
            }
            succ[i] = 0;
        }
        Some(cur)
    }
}
