//! Intrusive doubly-linked lists over dense item ids. Each item belongs to at
//! most one list at a time.

use crate::graph::NIL;

#[derive(Debug, Clone, Default)]
pub(crate) struct Lists {
    next: Vec<usize>,
    prev: Vec<usize>,
    owner: Vec<usize>,
    head: Vec<usize>,
    tail: Vec<usize>,
    len: Vec<usize>,
}

impl Lists {
    pub fn new(lists: usize) -> Self {
        Lists {
            head: vec![NIL; lists],
            tail: vec![NIL; lists],
            len: vec![0; lists],
            ..Default::default()
        }
    }

    fn reserve_item(&mut self, item: usize) {
        if item >= self.next.len() {
            self.next.resize(item + 1, NIL);
            self.prev.resize(item + 1, NIL);
            self.owner.resize(item + 1, NIL);
        }
    }

    pub fn owner(&self, item: usize) -> Option<usize> {
        match self.owner.get(item) {
            Some(&o) if o != NIL => Some(o),
            _ => None,
        }
    }

    pub fn len(&self, list: usize) -> usize {
        self.len[list]
    }

    pub fn front(&self, list: usize) -> Option<usize> {
        let h = self.head[list];
        (h != NIL).then_some(h)
    }

    pub fn push_back(&mut self, list: usize, item: usize) {
        self.reserve_item(item);
        debug_assert_eq!(self.owner[item], NIL);
        let t = self.tail[list];
        self.prev[item] = t;
        self.next[item] = NIL;
        if t == NIL {
            self.head[list] = item;
        } else {
            self.next[t] = item;
        }
        self.tail[list] = item;
        self.owner[item] = list;
        self.len[list] += 1;
    }

    pub fn push_front(&mut self, list: usize, item: usize) {
        self.reserve_item(item);
        debug_assert_eq!(self.owner[item], NIL);
        let h = self.head[list];
        self.next[item] = h;
        self.prev[item] = NIL;
        if h == NIL {
            self.tail[list] = item;
        } else {
            self.prev[h] = item;
        }
        self.head[list] = item;
        self.owner[item] = list;
        self.len[list] += 1;
    }

    /// Unlink `item` from whatever list holds it; returns that list.
    pub fn remove(&mut self, item: usize) -> Option<usize> {
        let list = self.owner(item)?;
        let (p, n) = (self.prev[item], self.next[item]);
        if p == NIL {
            self.head[list] = n;
        } else {
            self.next[p] = n;
        }
        if n == NIL {
            self.tail[list] = p;
        } else {
            self.prev[n] = p;
        }
        self.next[item] = NIL;
        self.prev[item] = NIL;
        self.owner[item] = NIL;
        self.len[list] -= 1;
        Some(list)
    }

    pub fn iter(&self, list: usize) -> ListIter<'_> {
        ListIter {
            lists: self,
            at: self.head[list],
        }
    }
}

pub(crate) struct ListIter<'a> {
    lists: &'a Lists,
    at: usize,
}

impl Iterator for ListIter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.at == NIL {
            return None;
        }
        let out = self.at;
        self.at = self.lists.next[out];
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_remove_iter() {
        let mut l = Lists::new(2);
        l.push_back(0, 5);
        l.push_back(0, 2);
        l.push_front(0, 9);
        l.push_back(1, 3);
        assert_eq!(l.iter(0).collect::<Vec<_>>(), vec![9, 5, 2]);
        assert_eq!(l.remove(5), Some(0));
        assert_eq!(l.iter(0).collect::<Vec<_>>(), vec![9, 2]);
        assert_eq!(l.remove(5), None);
        assert_eq!(l.len(0), 2);
        assert_eq!(l.owner(3), Some(1));
        l.remove(9);
        l.remove(2);
        assert_eq!(l.front(0), None);
    }
}
