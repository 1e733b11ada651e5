//! SA-IS suffix sorting over an integer alphabet, plus Kasai LCP.
//!
//! The text must end with a unique smallest symbol `0`.

const EMPTY: u32 = u32::MAX;

fn classify(s: &[u32]) -> Vec<bool> {
    let n = s.len();
    let mut stype = vec![false; n];
    stype[n - 1] = true;
    for i in (0..n - 1).rev() {
        stype[i] = s[i] < s[i + 1] || (s[i] == s[i + 1] && stype[i + 1]);
    }
    stype
}

#[inline]
fn is_lms(stype: &[bool], i: usize) -> bool {
    i > 0 && stype[i] && !stype[i - 1]
}

fn bucket_sizes(s: &[u32], k: usize) -> Vec<u32> {
    let mut sizes = vec![0u32; k];
    for &c in s {
        sizes[c as usize] += 1;
    }
    sizes
}

fn heads(sizes: &[u32]) -> Vec<u32> {
    let mut acc = 0;
    sizes
        .iter()
        .map(|&c| {
            let h = acc;
            acc += c;
            h
        })
        .collect()
}

fn tails(sizes: &[u32]) -> Vec<u32> {
    let mut acc = 0;
    sizes
        .iter()
        .map(|&c| {
            acc += c;
            acc
        })
        .collect()
}

fn induce(s: &[u32], sa: &mut [u32], stype: &[bool], sizes: &[u32]) {
    let n = s.len();
    let mut h = heads(sizes);
    for i in 0..n {
        let j = sa[i];
        if j != EMPTY && j > 0 && !stype[j as usize - 1] {
            let c = s[j as usize - 1] as usize;
            sa[h[c] as usize] = j - 1;
            h[c] += 1;
        }
    }
    let mut t = tails(sizes);
    for i in (0..n).rev() {
        let j = sa[i];
        if j != EMPTY && j > 0 && stype[j as usize - 1] {
            let c = s[j as usize - 1] as usize;
            t[c] -= 1;
            sa[t[c] as usize] = j - 1;
        }
    }
}

fn sais_rec(s: &[u32], sa: &mut [u32], k: usize) {
    let n = s.len();
    if n == 1 {
        sa[0] = 0;
        return;
    }
    let stype = classify(s);
    let sizes = bucket_sizes(s, k);

    // Stage 1: sort LMS substrings.
    sa.fill(EMPTY);
    let mut t = tails(&sizes);
    for i in 1..n {
        if is_lms(&stype, i) {
            let c = s[i] as usize;
            t[c] -= 1;
            sa[t[c] as usize] = i as u32;
        }
    }
    induce(s, sa, &stype, &sizes);

    let mut n1 = 0;
    for i in 0..n {
        if is_lms(&stype, sa[i] as usize) {
            sa[n1] = sa[i];
            n1 += 1;
        }
    }
    sa[n1..].fill(EMPTY);

    let mut name = 0u32;
    let mut prev = usize::MAX;
    for i in 0..n1 {
        let pos = sa[i] as usize;
        let mut diff = prev == usize::MAX;
        if !diff {
            for d in 0..n {
                if s[pos + d] != s[prev + d] || stype[pos + d] != stype[prev + d] {
                    diff = true;
                    break;
                } else if d > 0 && (is_lms(&stype, pos + d) || is_lms(&stype, prev + d)) {
                    break;
                }
            }
        }
        if diff {
            name += 1;
            prev = pos;
        }
        sa[n1 + pos / 2] = name - 1;
    }
    let mut j = n;
    for i in (n1..n).rev() {
        if sa[i] != EMPTY {
            j -= 1;
            sa[j] = sa[i];
        }
    }

    // Stage 2: sort the reduced problem.
    {
        let (head, reduced) = sa.split_at_mut(n - n1);
        let sa1 = &mut head[..n1];
        if (name as usize) < n1 {
            sais_rec(reduced, sa1, name as usize);
        } else {
            for (i, &c) in reduced.iter().enumerate() {
                sa1[c as usize] = i as u32;
            }
        }
        let mut j = 0;
        for i in 1..n {
            if is_lms(&stype, i) {
                reduced[j] = i as u32;
                j += 1;
            }
        }
        for x in sa1.iter_mut() {
            *x = reduced[*x as usize];
        }
    }

    // Stage 3: induce the full order from the sorted LMS suffixes.
    sa[n1..].fill(EMPTY);
    let mut t = tails(&sizes);
    for i in (0..n1).rev() {
        let j = sa[i];
        sa[i] = EMPTY;
        let c = s[j as usize] as usize;
        t[c] -= 1;
        sa[t[c] as usize] = j;
    }
    induce(s, sa, &stype, &sizes);
}

/// Suffix array of `text` over alphabet `0..k`. `text` must end with its only
/// occurrence of `0`.
pub fn suffix_array(text: &[u32], k: usize) -> Vec<u32> {
    debug_assert!(!text.is_empty());
    debug_assert_eq!(text[text.len() - 1], 0);
    debug_assert!(text[..text.len() - 1].iter().all(|&c| c > 0));
    let mut sa = vec![0u32; text.len()];
    sais_rec(text, &mut sa, k);
    sa
}

/// Kasai et al. LCP; `lcp[0] = 0`.
pub fn lcp_kasai(text: &[u32], sa: &[u32]) -> Vec<u32> {
    let n = text.len();
    let mut rank = vec![0u32; n];
    for (i, &p) in sa.iter().enumerate() {
        rank[p as usize] = i as u32;
    }
    let mut lcp = vec![0u32; n];
    let mut h = 0usize;
    for q in 0..n {
        let r = rank[q] as usize;
        if r == 0 {
            h = 0;
            continue;
        }
        let j = sa[r - 1] as usize;
        while q + h < n && j + h < n && text[q + h] == text[j + h] {
            h += 1;
        }
        lcp[r] = h as u32;
        h = h.saturating_sub(1);
    }
    lcp
}
