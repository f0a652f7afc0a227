#!/usr/bin/env python3
# Software License Agreement (BSD License)
#
# Copyright (c) 2026, kinrealize developers.
# All rights reserved.

"""
All structurally different realizations as subgraphs of the dense realization.

The search explores exclusion sets H over the indexed dense edges. A node only spawns
children H + {e} for retained edges e indexed above max(H), so every exclusion set is
reached along one canonical chain. Subproblems are memoized on the retained edge set,
which fully determines the program.
"""

import time
import itertools
import threading
from multiprocessing.pool import ThreadPool
import pandas as pd
from ..core.config.kr_config import KRCONF
from ..core.utils.log import logger
from ..core.utils.convert import edge_label
from .code import ContractViolation, InfeasibleError, LimitReached, NumericFailure
from .kinetic import r_max
from .realization import dense_realization


class SupportEntry(object):
    def __init__(self, edges, realization):
        self.edges = frozenset(edges)
        self.realization = realization

    @property
    def kirchhoff(self):
        return self.realization.kirchhoff

    @property
    def M_used(self):
        return self.realization.M_used

    def __len__(self):
        return len(self.edges)

    def __repr__(self):
        return 'SupportEntry({})'.format(', '.join(edge_label(e) for e in sorted(self.edges)))


class RealizationSet(object):
    def __init__(self, dense, entries, stats=None, partial=False):
        self._dense = dense
        self._entries = sorted(entries, key=lambda s: (-len(s.edges), sorted(s.edges)))
        self._stats = dict(stats or {})
        self._partial = partial

    @property
    def dense(self):
        return self._dense

    @property
    def supports(self):
        return self._entries

    @property
    def support_sets(self):
        return {s.edges for s in self._entries}

    @property
    def count(self):
        return len(self._entries)

    @property
    def stats(self):
        return self._stats

    @property
    def partial(self):
        return self._partial

    @property
    def r_max(self):
        return r_max(self._dense.edge_count) if self._dense.edge_count else 1


class _Explorer(object):
    """
    Shared state of one enumeration: memo of solved retained sets and the found supports
    """
    def __init__(self, problem, dense_edges, threads, max_realizations, progress, solver_kwargs):
        self.problem = problem
        self.dense_edges = list(dense_edges)
        self.outside = frozenset(e for e in problem.candidate_edges if e not in set(dense_edges))
        self.threads = max(1, int(threads or 1))
        self.max_realizations = max_realizations
        self.progress = progress
        self.solver_kwargs = solver_kwargs
        self.memo = {}
        self.found = {}
        self.expanded = {}
        self.solves = 0
        self.tasks_done = 0
        self.lock = threading.Lock()

    def solve_retained(self, retained):
        """
        Dense realization with every dense edge outside `retained` excluded; None when infeasible
        """
        retained = frozenset(retained)
        with self.lock:
            if retained in self.memo:
                return self.memo[retained]
        excluded = self.outside | frozenset(e for e in self.dense_edges if e not in retained)
        try:
            result = dense_realization(self.problem.with_exclusions(excluded), **self.solver_kwargs)
            solves = result.stats.get('solves', 0)
        except InfeasibleError:
            result, solves = None, 1
        with self.lock:
            self.memo.setdefault(retained, result)
            self.solves += solves
        return result

    def record(self, support):
        """
        Insert-if-absent of a support that passes the exact-support test
        """
        with self.lock:
            if support in self.found:
                return False
        realization = self.solve_retained(support)
        if realization is None or realization.support != support:
            logger.warning('support {} failed the exact-support test'.format(sorted(support)))
            return False
        with self.lock:
            if support in self.found:
                return False
            self.found[support] = realization
            return True

    def children(self, support, H):
        top = max(H) if H else -1
        with self.lock:
            seen = self.expanded.get(support)
            if seen is not None and seen <= top:
                return []
            upper = seen if seen is not None else len(self.dense_edges)
            self.expanded[support] = top
        index = {e: i for i, e in enumerate(self.dense_edges)}
        return [H + (index[e],) for e in sorted(support, key=index.get) if top < index[e] <= upper]

    def visit(self, H):
        retained = frozenset(e for i, e in enumerate(self.dense_edges) if i not in H)
        realization = self.solve_retained(retained)
        if realization is None:
            return []
        support = realization.support
        self.record(support)
        out = self.children(support, H)
        with self.lock:
            self.tasks_done += 1
        return out

    def run(self):
        frontier = [()]
        partial = False
        error = None
        pool = ThreadPool(self.threads) if self.threads > 1 else None
        try:
            while frontier:
                if pool is not None:
                    batches = pool.map(self.visit, frontier)
                else:
                    batches = [self.visit(H) for H in frontier]
                frontier = [H for batch in batches for H in batch]
                if self.progress is not None:
                    self.progress(self.tasks_done, len(frontier))
                logger.verbose('enumeration: {} tasks done, {} queued, {} supports'.format(
                    self.tasks_done, len(frontier), len(self.found)))
                if self.max_realizations is not None and len(self.found) >= self.max_realizations:
                    partial = bool(frontier) or len(self.found) > self.max_realizations
                    if partial:
                        logger.warning('realization cap {} reached, results are partial'.format(
                            self.max_realizations))
                    break
        except NumericFailure as e:
            logger.error('enumeration aborted on a numeric failure: {}'.format(e))
            partial = True
            error = str(e)
        finally:
            if pool is not None:
                pool.close()
                pool.join()
        return partial, error


def enumerate_all(problem, threads=KRCONF.Enumeration.DEFAULT_THREADS, max_realizations=None, progress=None,
                  **solver_kwargs):
    """
    Every support of a feasible realization of the problem, each with one representative

    :param threads: worker threads solving subproblems
    :param max_realizations: stop once this many supports are found (partial flag set)
    :param progress: callable(tasks_done, tasks_queued) called after every search level
    """
    start = time.monotonic()
    dense = dense_realization(problem, **solver_kwargs)
    explorer = _Explorer(problem, sorted(dense.support), threads, max_realizations, progress, solver_kwargs)
    explorer.memo[frozenset(dense.support)] = dense
    partial, error = explorer.run()
    entries = [SupportEntry(s, r) for s, r in explorer.found.items()]
    if max_realizations is not None and len(entries) > max_realizations:
        entries = sorted(entries, key=lambda s: (-len(s.edges), sorted(s.edges)))[:max_realizations]
    stats = {
        'solves': explorer.solves + dense.stats.get('solves', 0),
        'tasks': explorer.tasks_done,
        'seconds': time.monotonic() - start,
    }
    if error:
        stats['error'] = error
    logger.info('enumeration found {} realizations of a {}-edge dense support in {:.2f}s'.format(
        len(entries), dense.edge_count, stats['seconds']))
    return RealizationSet(dense, entries, stats, partial)


def brute_force_enumerate(problem, threads=KRCONF.Enumeration.DEFAULT_THREADS, **solver_kwargs):
    """
    Validation oracle: test every nonempty subset of the dense support for being an exact support
    """
    start = time.monotonic()
    dense = dense_realization(problem, **solver_kwargs)
    edges = sorted(dense.support)
    if len(edges) > KRCONF.Enumeration.BRUTE_FORCE_MAX_EDGES:
        raise LimitReached('brute force refuses {} dense edges (limit {})'.format(
            len(edges), KRCONF.Enumeration.BRUTE_FORCE_MAX_EDGES))
    explorer = _Explorer(problem, edges, threads, None, None, solver_kwargs)
    subsets = [frozenset(c) for size in range(1, len(edges) + 1) for c in itertools.combinations(edges, size)]
    if not subsets:
        subsets = [frozenset()]

    def check(subset):
        realization = explorer.solve_retained(subset)
        return realization if realization is not None and realization.support == subset else None

    if explorer.threads > 1:
        with ThreadPool(explorer.threads) as pool:
            results = pool.map(check, subsets)
    else:
        results = [check(s) for s in subsets]
    entries = [SupportEntry(s, r) for s, r in zip(subsets, results) if r is not None]
    stats = {'solves': explorer.solves + dense.stats.get('solves', 0), 'checks': len(subsets),
             'seconds': time.monotonic() - start}
    return RealizationSet(dense, entries, stats)


def exclusion_study(problem, candidate_exclusions, **kwargs):
    """
    Realization counts with each candidate exclusion set added to the problem

    :return: pandas.DataFrame with columns excluded, dense_edges, count, ratio
    """
    dense = dense_realization(problem, **{k: v for k, v in kwargs.items() if k in ('tol', 'eps')})
    rows = []
    for H in candidate_exclusions:
        H = frozenset(H)
        if not H <= dense.support:
            raise ContractViolation('exclusion set {} is not part of the dense support'.format(
                [edge_label(e) for e in sorted(H - dense.support)]))
        label = '+'.join(edge_label(e) for e in sorted(H)) or '-'
        try:
            rset = enumerate_all(problem.with_exclusions(H), **kwargs)
        except InfeasibleError:
            logger.info('excluding {} leaves no realization'.format(label))
            rows.append({'excluded': label, 'dense_edges': 0, 'count': 0, 'ratio': 0.0})
            continue
        ratio = rset.count / rset.r_max
        rows.append({'excluded': label, 'dense_edges': rset.dense.edge_count, 'count': rset.count, 'ratio': ratio})
    return pd.DataFrame(rows, columns=['excluded', 'dense_edges', 'count', 'ratio'])


def sparse_realizations(realization_set):
    """
    Supports with the fewest edges; several may attain the minimum
    """
    if not realization_set.supports:
        return []
    fewest = min(len(s) for s in realization_set.supports)
    return [s for s in realization_set.supports if len(s) == fewest]
