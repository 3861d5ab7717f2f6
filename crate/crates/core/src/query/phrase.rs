/// One query term of a phrase with its document positions.
#[derive(Debug, Clone, Copy)]
pub struct PhraseTerm<'a> {
    /// Position of the term in the analyzed query (stopword gaps kept).
    pub query_pos: u32,
    /// Terms with equal `group` are the same term and must bind to
    /// different document positions.
    pub group: usize,
    pub positions: &'a [u32],
}

/// True when some choice of one document position `p_i` per term gives
/// offsets `p_i - q_i` spanning at most `slop`.
///
/// With `slop == 0` this is exact adjacency relative to the query
/// positions; an intervening word costs 1 and swapping two adjacent terms
/// costs 2.
pub fn phrase_matches(terms: &[PhraseTerm<'_>], slop: u32) -> bool {
    if terms.is_empty() || terms.iter().any(|t| t.positions.is_empty()) {
        return false;
    }
    let mut order: Vec<usize> = (0..terms.len()).collect();
    order.sort_by_key(|&i| (terms[i].group, terms[i].query_pos));

    let anchor = terms.iter().min_by_key(|t| t.positions.len()).unwrap();
    let slop = i64::from(slop);
    let mut lows: Vec<i64> = Vec::new();
    if slop == 0 {
        lows.extend(anchor.positions.iter().map(|&p| i64::from(p) - i64::from(anchor.query_pos)));
    } else {
        // The window's lower edge sits on some chosen offset within `slop`
        // of an anchor offset.
        for t in terms {
            lows.extend(t.positions.iter().map(|&p| i64::from(p) - i64::from(t.query_pos)));
        }
        lows.sort_unstable();
        lows.dedup();
    }
    lows.into_iter().any(|lo| feasible(terms, &order, lo, slop))
}

fn feasible(terms: &[PhraseTerm<'_>], order: &[usize], lo: i64, slop: i64) -> bool {
    let mut prev: Option<(usize, i64)> = None;
    for &i in order {
        let t = &terms[i];
        let q = i64::from(t.query_pos);
        let mut from = lo + q;
        if let Some((g, p)) = prev {
            if g == t.group {
                from = from.max(p + 1);
            }
        }
        let to = lo + q + slop;
        if to < 0 || from > to {
            return false;
        }
        let from_u = from.max(0).min(i64::from(u32::MAX)) as u32;
        let idx = t.positions.partition_point(|&p| p < from_u);
        match t.positions.get(idx) {
            Some(&p) if i64::from(p) <= to => prev = Some((t.group, i64::from(p))),
            _ => return false,
        }
    }
    true
}
