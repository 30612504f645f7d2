"""Exact rational linear programming.

A deliberately plain two-phase primal simplex over sparse rows of rationals,
with Bland's anti-cycling rule.  Bland's rule guarantees termination and,
together with the fixed variable/constraint order, makes every solve
bit-reproducible; speed is secondary to exactness at the problem sizes this
package generates.  Optimal points are re-verified against every constraint
before being returned, and infeasibility comes with a Farkas certificate
that is verified exactly as well.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .rational import ONE, ZERO, Rat, rat, rat_str

LE, EQ, GE = "<=", "==", ">="


class LpError(Exception):
    pass


@dataclass
class _Constraint:
    coeffs: dict[str, Rat]
    relation: str
    rhs: Rat


class LinearProgram:
    """A named-variable LP: rational rows, optional linear objective.

    Variables default to a lower bound of zero; pass ``free=True`` for
    unbounded sign.  Constraints reference declared variables only.
    """

    def __init__(self) -> None:
        self.var_names: list[str] = []
        self.var_free: dict[str, bool] = {}
        self.constraints: list[_Constraint] = []
        self.objective: dict[str, Rat] = {}
        self.sense: str = "max"

    def add_var(self, name: str, free: bool = False) -> str:
        if name in self.var_free:
            raise LpError(f"duplicate variable {name!r}")
        self.var_names.append(name)
        self.var_free[name] = free
        return name

    def _check_row(self, coeffs: Mapping[str, object]) -> dict[str, Rat]:
        row = {}
        for v, c in coeffs.items():
            if v not in self.var_free:
                raise LpError(f"constraint references undeclared variable {v!r}")
            q = rat(c)
            if q != 0:
                row[v] = q
        return row

    def add_constraint(self, coeffs: Mapping[str, object], relation: str, rhs) -> int:
        if relation not in (LE, EQ, GE):
            raise LpError(f"unknown relation {relation!r}")
        self.constraints.append(_Constraint(self._check_row(coeffs), relation, rat(rhs)))
        return len(self.constraints) - 1

    def add_le(self, coeffs, rhs) -> int:
        return self.add_constraint(coeffs, LE, rhs)

    def add_ge(self, coeffs, rhs) -> int:
        return self.add_constraint(coeffs, GE, rhs)

    def add_eq(self, coeffs, rhs) -> int:
        return self.add_constraint(coeffs, EQ, rhs)

    def set_objective(self, coeffs: Mapping[str, object], sense: str = "max") -> None:
        if sense not in ("max", "min"):
            raise LpError(f"unknown sense {sense!r}")
        self.objective = self._check_row(coeffs)
        self.sense = sense

    def copy(self) -> "LinearProgram":
        lp = LinearProgram()
        lp.var_names = list(self.var_names)
        lp.var_free = dict(self.var_free)
        lp.constraints = [
            _Constraint(dict(c.coeffs), c.relation, c.rhs) for c in self.constraints
        ]
        lp.objective = dict(self.objective)
        lp.sense = self.sense
        return lp

    def dump(self) -> str:
        """Plain-text rendering for external cross-checking."""

        def term(c, v):
            return f"{rat_str(c)}*{v}"

        lines = []
        if self.objective:
            body = " + ".join(term(c, v) for v, c in sorted(self.objective.items()))
            lines.append(f"{self.sense} {body}")
        else:
            lines.append("feasibility")
        lines.append("s.t.")
        for k, con in enumerate(self.constraints):
            body = " + ".join(term(c, v) for v, c in sorted(con.coeffs.items())) or "0"
            lines.append(f"  [{k}] {body} {con.relation} {rat_str(con.rhs)}")
        frees = [v for v in self.var_names if self.var_free[v]]
        nonneg = [v for v in self.var_names if not self.var_free[v]]
        if nonneg:
            lines.append("  " + ", ".join(nonneg) + " >= 0")
        if frees:
            lines.append("  " + ", ".join(frees) + " free")
        return "\n".join(lines)


@dataclass
class LpOutcome:
    status: str  # "optimal" | "infeasible" | "unbounded"
    point: dict[str, Rat] | None = None
    value: Rat | None = None
    certificate: list[Rat] | None = None  # per-constraint Farkas multipliers

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _check_point(lp: LinearProgram, point: dict[str, Rat]) -> None:
    for v in lp.var_names:
        if not lp.var_free[v] and point.get(v, ZERO) < 0:
            raise AssertionError(f"solver returned negative value for {v!r}")
    for k, con in enumerate(lp.constraints):
        lhs = sum((c * point.get(v, ZERO) for v, c in con.coeffs.items()), ZERO)
        ok = lhs <= con.rhs if con.relation == LE else lhs >= con.rhs if con.relation == GE else lhs == con.rhs
        if not ok:
            raise AssertionError(
                f"solver point violates constraint {k}: {rat_str(lhs)} {con.relation} {rat_str(con.rhs)}"
            )


def _check_certificate(lp: LinearProgram, lam: list[Rat]) -> None:
    combo: dict[str, Rat] = {}
    rhs_total = ZERO
    for mult, con in zip(lam, lp.constraints):
        if con.relation == LE and mult > 0:
            raise AssertionError("certificate sign error on <= row")
        if con.relation == GE and mult < 0:
            raise AssertionError("certificate sign error on >= row")
        if mult == 0:
            continue
        for v, c in con.coeffs.items():
            combo[v] = combo.get(v, ZERO) + mult * c
        rhs_total += mult * con.rhs
    for v, c in combo.items():
        if lp.var_free[v]:
            if c != 0:
                raise AssertionError("certificate does not cancel a free variable")
        elif c > 0:
            raise AssertionError("certificate has positive aggregated coefficient")
    if rhs_total <= 0:
        raise AssertionError("certificate rhs combination is not positive")


class _Simplex:
    """Sparse tableau with Bland pivoting over the canonical equality form."""

    def __init__(self, lp: LinearProgram):
        self.lp = lp
        self.col_names: list[tuple] = []  # ("var", name, sign) / ("slack", row) / ("art", row)
        self.var_cols: dict[str, tuple[int, int | None]] = {}
        for v in lp.var_names:
            if lp.var_free[v]:
                p = self._new_col(("var", v, 1))
                n = self._new_col(("var", v, -1))
                self.var_cols[v] = (p, n)
            else:
                self.var_cols[v] = (self._new_col(("var", v, 1)), None)

        self.rows: list[dict[int, Rat]] = []
        self.rhs: list[Rat] = []
        self.row_sign: list[int] = []
        self.basis: list[int] = []
        self.unit_col: list[int] = []
        self.art_cols: set[int] = set()

        for r, con in enumerate(lp.constraints):
            row: dict[int, Rat] = {}
            for v, c in con.coeffs.items():
                p, n = self.var_cols[v]
                if c != 0:
                    row[p] = row.get(p, ZERO) + c
                    if n is not None:
                        row[n] = row.get(n, ZERO) - c
            rhs = con.rhs
            sign = 1
            if rhs < 0:
                sign = -1
                rhs = -rhs
                row = {c: -v for c, v in row.items()}
            relation = con.relation
            if sign == -1 and relation != EQ:
                relation = LE if relation == GE else GE
            slack_dir = 0
            if relation == LE:
                slack_dir = 1
            elif relation == GE:
                slack_dir = -1
            basis_col = None
            if slack_dir:
                sc = self._new_col(("slack", r))
                row[sc] = Rat(slack_dir)
                if slack_dir == 1:
                    basis_col = sc
            if basis_col is None:
                ac = self._new_col(("art", r))
                row[ac] = ONE
                self.art_cols.add(ac)
                basis_col = ac
            row = {c: v for c, v in row.items() if v != 0}
            self.rows.append(row)
            self.rhs.append(rhs)
            self.row_sign.append(sign)
            self.basis.append(basis_col)
            self.unit_col.append(basis_col)

        self.ncols = len(self.col_names)
        self.obj: dict[int, Rat] = {}
        self.obj_val = ZERO
        self.blocked: set[int] = set()

    def _new_col(self, tag) -> int:
        self.col_names.append(tag)
        return len(self.col_names) - 1

    # -- pivoting ------------------------------------------------------

    def _pivot(self, r: int, j: int) -> None:
        row = self.rows[r]
        piv = row[j]
        if piv != 1:
            inv = ONE / piv
            row = {c: v * inv for c, v in row.items()}
            self.rows[r] = row
            self.rhs[r] *= inv
        rr = self.rhs[r]
        for k, other in enumerate(self.rows):
            if k == r:
                continue
            f = other.get(j)
            if f:
                for c, v in row.items():
                    nv = other.get(c, ZERO) - f * v
                    if nv:
                        other[c] = nv
                    else:
                        other.pop(c, None)
                self.rhs[k] -= f * rr
        f = self.obj.get(j)
        if f:
            for c, v in row.items():
                nv = self.obj.get(c, ZERO) - f * v
                if nv:
                    self.obj[c] = nv
                else:
                    self.obj.pop(c, None)
            self.obj_val -= f * rr
        self.basis[r] = j

    def _enter_bland(self) -> int | None:
        for j in range(self.ncols):
            if j in self.blocked:
                continue
            if self.obj.get(j, ZERO) < 0:
                return j
        return None

    def _leave_bland(self, j: int) -> int | None:
        best_ratio = None
        best_row = None
        best_var = None
        for r, row in enumerate(self.rows):
            a = row.get(j, ZERO)
            if a > 0:
                ratio = self.rhs[r] / a
                if best_ratio is None or ratio < best_ratio or (
                    ratio == best_ratio and self.basis[r] < best_var
                ):
                    best_ratio = ratio
                    best_row = r
                    best_var = self.basis[r]
        return best_row

    def _run(self) -> str:
        while True:
            j = self._enter_bland()
            if j is None:
                return "optimal"
            r = self._leave_bland(j)
            if r is None:
                return "unbounded"
            self._pivot(r, j)

    # -- phases --------------------------------------------------------

    def _load_objective(self, cost: dict[int, Rat]) -> None:
        self.obj = dict(cost)
        self.obj_val = ZERO
        for r, b in enumerate(self.basis):
            cb = cost.get(b, ZERO)
            if cb:
                for c, v in self.rows[r].items():
                    nv = self.obj.get(c, ZERO) - cb * v
                    if nv:
                        self.obj[c] = nv
                    else:
                        self.obj.pop(c, None)
                self.obj_val -= cb * self.rhs[r]

    def phase1(self) -> Rat:
        if not self.art_cols:
            return ZERO
        cost = {c: ONE for c in self.art_cols}
        self._load_objective(cost)
        status = self._run()
        assert status == "optimal", "phase 1 cannot be unbounded"
        return -self.obj_val  # obj_val tracks -(current cost)

    def farkas(self) -> list[Rat]:
        """Original-row multipliers proving infeasibility, from phase-1 duals.

        At a phase-1 optimum with positive value, the simplex multipliers y
        (read off the reduced costs of each row's initial unit column)
        satisfy y'A <= 0 on every real column and y'b > 0; mapping back
        through the row sign flips gives multipliers on the original rows.
        """
        lam = []
        for r in range(len(self.rows)):
            uc = self.unit_col[r]
            rc = self.obj.get(uc, ZERO)
            cost = ONE if uc in self.art_cols else ZERO
            y = cost - rc
            lam.append(Rat(self.row_sign[r]) * y)
        return lam

    def drop_artificials(self) -> None:
        """Pivot zero-valued artificials out of the basis, drop dead rows."""
        self.blocked = set(self.art_cols)
        for r in range(len(self.rows)):
            if self.basis[r] in self.art_cols:
                pivot_col = None
                for c in sorted(self.rows[r]):
                    if c not in self.art_cols and self.rows[r][c] != 0:
                        pivot_col = c
                        break
                if pivot_col is not None:
                    self._pivot(r, pivot_col)
                else:
                    # row is 0 = 0 over real columns: redundant
                    self.rows[r] = {self.basis[r]: ONE}
                    self.rhs[r] = ZERO

    def phase2(self) -> str:
        cost: dict[int, Rat] = {}
        neg = self.lp.sense == "max"
        for v, c in self.lp.objective.items():
            p, n = self.var_cols[v]
            q = -c if neg else c
            if q != 0:
                cost[p] = cost.get(p, ZERO) + q
                if n is not None:
                    cost[n] = cost.get(n, ZERO) - q
        self._load_objective(cost)
        return self._run()

    def extract_point(self) -> dict[str, Rat]:
        col_val = {b: self.rhs[r] for r, b in enumerate(self.basis)}
        point = {}
        for v in self.lp.var_names:
            p, n = self.var_cols[v]
            val = col_val.get(p, ZERO)
            if n is not None:
                val -= col_val.get(n, ZERO)
            point[v] = val
        return point


def solve(lp: LinearProgram) -> LpOutcome:
    """Solve exactly; optimal points and Farkas certificates are re-verified."""
    sx = _Simplex(lp)
    infeas = sx.phase1()
    if infeas > 0:
        lam = sx.farkas()
        _check_certificate(lp, lam)
        return LpOutcome(status="infeasible", certificate=lam)
    sx.drop_artificials()
    status = sx.phase2()
    if status == "unbounded":
        return LpOutcome(status="unbounded")
    point = sx.extract_point()
    _check_point(lp, point)
    value = sum((c * point.get(v, ZERO) for v, c in lp.objective.items()), ZERO)
    return LpOutcome(status="optimal", point=point, value=value)


def maximize_then_restrict(
    lp: LinearProgram, second: Mapping[str, object], second_sense: str = "max"
) -> tuple[LpOutcome, LpOutcome]:
    """Optimize, pin the optimal value, then optimize a second objective.

    Returns (stage-1 outcome, stage-2 outcome); the stage-2 point is optimal
    for the second objective over the argmax face of the first.  Raises on
    an unbounded or infeasible first stage.
    """
    first = solve(lp)
    if first.status != "optimal":
        raise LpError(f"first stage is {first.status}")
    pinned = lp.copy()
    pinned.add_eq(lp.objective, first.value)
    pinned.set_objective(dict(second), second_sense)
    second_out = solve(pinned)
    if second_out.status == "infeasible":
        raise AssertionError("argmax face reported empty; this cannot happen")
    return first, second_out
