import csv
import io
import logging
import os
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence

from App.asymptotics.homogeneous import PROFILE_COLUMNS, HomogeneousProfile, monotonicity_report, profile_table
from App.asymptotics.planner import PlanTable
from App.bounds.baselines import ComparisonRow, comparison_row
from App.bounds.engine import BoundsResult
from App.bounds.extremal import ExtremalReport
from App.errors import CausaBoundError, DomainError
from App.figures import BandChart, IntervalChart
from App.models.transition import TransitionMatrix
from utils.configHandler import ConfigHandler
from utils.helper import HelperReport

PROFILE_HEADER = ("n",) + PROFILE_COLUMNS
BOUNDS_HEADER = ("method", "lo", "hi", "identified")
EXTREMAL_HEADER = ("regime", "extreme", "side", "value", "witness", "pattern")
PLAN_HEADER = ("k", "LB_if_one", "posterior_prob_one", "expected_LB")
# interval shown for each comparison column in the second figure
COMPARISON_INTERVALS = (
    ("simple", "sLB", "sUB"),
    ("monotonic", "mono", "mono"),
    ("homogeneous 2-step", "hom2LB", "hom2UB"),
    ("homogeneous infinite", "homInfLB", "homInfUB"),
    ("best 2-step point", "best2Point", "best2Point"),
    ("best 2-step oLB", "best2oLB", "best2oLB"),
    ("unobserved covariate", "covUnobserved", "covUnobserved"),
)


@dataclass
class CausationReport:
    """
    Turns the bounds computations into CSV tables and SVG figures.

    Attributes:
        logger (logging.Logger): Logger instance; one info line per file written.
        config_data (ConfigHandler): settings for number format and figure size.
        output_dir (str): directory every file is written to.

    Methods:
        profile_text(table) -> str: a homogeneous profile as CSV text.
        write_profile(P, n_max, name) -> str
        write_bounds(result, name) -> str
        write_extremal(report, name) -> str
        write_plan(table, name) -> str
        write_compare(taus, rhos, name) -> str
        write_figure1(tau, rho_values, n_max) -> List[str]: one CSV and one SVG per rho.
        write_figure2(taus, rhos) -> List[str]
    """

    logger: logging.Logger
    config_data: ConfigHandler
    output_dir: Optional[str] = None
    helper: HelperReport = field(init=False)

    def __post_init__(self):
        self.helper = HelperReport(self.config_data)
        if self.output_dir is None:
            self.output_dir = self.config_data.get_output_dir()

    def _number(self, value) -> str:
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, int):
            return str(value)
        if value is None or isinstance(value, float):
            return self.helper.format_number(value)
        return str(value)

    def csv_text(self, header: Sequence[str], rows: Iterable[Sequence]) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([self._number(value) for value in row])
        return buffer.getvalue()

    def write_text(self, name: str, text: str) -> str:
        os.makedirs(self.output_dir, exist_ok=True)
        path = os.path.join(self.output_dir, name)
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        self.logger.info(f"Wrote {path}")
        return path

    def profile_text(self, table: HomogeneousProfile) -> str:
        return self.csv_text(PROFILE_HEADER, ((row.n,) + row.values() for row in table.rows))

    def write_profile(self, P: TransitionMatrix, n_max: int, name: str = "profile.csv") -> str:
        return self.write_text(name, self.profile_text(profile_table(P, n_max)))

    def bounds_text(self, result: BoundsResult) -> str:
        return self.csv_text(BOUNDS_HEADER, [(result.method.value, result.lo, result.hi, result.identified)])

    def write_bounds(self, result: BoundsResult, name: str = "bounds.csv") -> str:
        return self.write_text(name, self.bounds_text(result))

    def extremal_text(self, report: ExtremalReport) -> str:
        rows = [(e.regime.value, e.extreme, e.side, e.value, str(e.witness), e.pattern.format()) for e in report]
        return self.csv_text(EXTREMAL_HEADER, rows)

    def write_extremal(self, report: ExtremalReport, name: str = "extremal.csv") -> str:
        return self.write_text(name, self.extremal_text(report))

    def plan_text(self, table: PlanTable) -> str:
        rows = [(r.k, r.LB_if_one, r.posterior_prob_one, r.expected_LB) for r in table.rows]
        return self.csv_text(PLAN_HEADER, rows)

    def write_plan(self, table: PlanTable, name: str = "plan.csv") -> str:
        return self.write_text(name, self.plan_text(table))

    def comparison_rows(self, taus: Sequence[float], rhos: Sequence[float]) -> List[ComparisonRow]:
        rows = []
        for tau in taus:
            for rho in rhos:
                try:
                    P = TransitionMatrix(tau, rho)
                except DomainError:
                    self.logger.info(f"Skipping infeasible comparison cell tau={tau}, rho={rho}")
                    continue
                rows.append(comparison_row(P))
        return rows

    def compare_text(self, rows: Sequence[ComparisonRow]) -> str:
        return self.csv_text(ComparisonRow.columns(), (row.values() for row in rows))

    def write_compare(self, taus: Sequence[float], rhos: Sequence[float], name: str = "compare.csv") -> str:
        return self.write_text(name, self.compare_text(self.comparison_rows(taus, rhos)))

    def write_figure1(self, tau: float, rho_values: Sequence[float], n_max: int) -> List[str]:
        """Homogeneous bands against n, one CSV and one SVG per rho."""
        paths = []
        for rho in rho_values:
            P = TransitionMatrix(tau, rho)
            table = profile_table(P, n_max)
            self._log_shape_findings(P, n_max)
            stem = f"figure1_rho_{format(rho, 'g')}"
            paths.append(self.write_text(f"{stem}.csv", self.profile_text(table)))

            chart = BandChart(title=f"tau = {format(tau, 'g')}, rho = {format(rho, 'g')}",
                              width=self.config_data.get_figure_width(),
                              height=self.config_data.get_figure_height())
            ns = table.ns
            chart.add("unobserved", ns, table.column("uLB"), table.column("uUB"))
            chart.add("all-positive", ns, table.column("oLB"), table.column("oUB"))
            chart.add("alternating", ns, table.column("mLB"), table.column("mUB"))
            paths.append(self.write_text(f"{stem}.svg", chart.render()))
        return paths

    def write_figure2(self, taus: Sequence[float], rhos: Sequence[float]) -> List[str]:
        rows = self.comparison_rows(taus, rhos)
        paths = [self.write_text("figure2_compare.csv", self.compare_text(rows))]

        chart = IntervalChart(title="Bounds on PC by side information",
                              methods=[label for label, _, _ in COMPARISON_INTERVALS],
                              width=self.config_data.get_figure_width(),
                              height=self.config_data.get_figure_height())
        for row in rows:
            intervals = [(getattr(row, lo), getattr(row, hi)) for _, lo, hi in COMPARISON_INTERVALS]
            chart.add(f"tau={format(row.tau, 'g')} rho={format(row.rho, 'g')}", intervals)
        paths.append(self.write_text("figure2_compare.svg", chart.render()))
        return paths

    def _log_shape_findings(self, P: TransitionMatrix, n_max: int) -> None:
        try:
            report = monotonicity_report(P, n_max)
        except CausaBoundError as exc:
            self.logger.warning(f"Shape checks unavailable for {P}: {exc}")
            return
        for failure in report.failures():
            self.logger.warning(f"Shape finding for {P}: {failure.name} fails first at n={failure.first_violation}")
