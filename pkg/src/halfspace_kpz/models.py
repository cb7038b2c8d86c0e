"""
Modelos de dados do pacote
"""
import math
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

Cell = Tuple[int, int]


class WeightKind(str, Enum):
    EXPONENTIAL = "exponential"
    GEOMETRIC = "geometric"
    LOG_GAMMA = "log_gamma"


class Layout(str, Enum):
    """
    EXTENDED: pesos com parâmetros alpha + gamma_i na diagonal e gamma_i + gamma_j fora dela.
    BOUNDARY_COLUMN: espaço inteiro, coluna i = 1 com parâmetro alpha, demais com beta.
    """
    EXTENDED = "extended"
    BOUNDARY_COLUMN = "boundary_column"


class Window(BaseModel):
    """
    Retângulo inteiro [i_min, i_max] x [j_min, j_max] (inclusivo)
    """
    model_config = ConfigDict(frozen=True)

    i_min: int
    i_max: int
    j_min: int
    j_max: int

    @model_validator(mode="after")
    def _check_order(self) -> "Window":
        if self.i_min > self.i_max or self.j_min > self.j_max:
            raise ValueError("Janela vazia: os limites mínimos devem ser <= máximos")
        return self

    @classmethod
    def square(cls, lo: int, hi: int) -> "Window":
        return cls(i_min=lo, i_max=hi, j_min=lo, j_max=hi)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.i_max - self.i_min + 1, self.j_max - self.j_min + 1)

    @property
    def area(self) -> int:
        rows, cols = self.shape
        return rows * cols

    def contains(self, i: int, j: int) -> bool:
        return self.i_min <= i <= self.i_max and self.j_min <= j <= self.j_max


class EnvironmentSpec(BaseModel):
    """
    Especificação completa de uma lei de pesos numa janela
    """
    model_config = ConfigDict(frozen=True, ser_json_inf_nan="constants")

    kind: WeightKind = WeightKind.EXPONENTIAL
    alpha: float
    theta: float = 0.5
    gamma: Dict[int, float] = Field(default_factory=dict)
    symmetric: bool = True
    window: Window
    layout: Layout = Layout.EXTENDED

    def gamma_at(self, i: int) -> float:
        return self.gamma.get(i, self.theta)

    def with_window(self, window: Window) -> "EnvironmentSpec":
        return self.model_copy(update={"window": window})

    @classmethod
    def half_space(
        cls,
        alpha: float,
        window: Window,
        kind: WeightKind = WeightKind.EXPONENTIAL,
        bulk: float = 1.0,
    ) -> "EnvironmentSpec":
        """
        Modelo homogêneo de meio-espaço: diagonal com parâmetro alpha, bulk com parâmetro bulk
        e células com i < j fora da rede.

        Para Geometric, bulk é o parâmetro q em (0, 1) das células fora da diagonal.
        """
        if kind == WeightKind.GEOMETRIC:
            if not 0.0 < bulk < 1.0:
                raise ValueError("Para Geometric o bulk deve estar em (0, 1)")
            theta = math.sqrt(bulk)
            return cls(kind=kind, alpha=alpha / theta, theta=theta, symmetric=False, window=window)
        return cls(kind=kind, alpha=alpha - bulk / 2.0, theta=bulk / 2.0, symmetric=False, window=window)

    @classmethod
    def boundary_column(
        cls,
        alpha: float,
        beta: float,
        window: Window,
        kind: WeightKind = WeightKind.EXPONENTIAL,
    ) -> "EnvironmentSpec":
        return cls(
            kind=kind,
            alpha=alpha,
            theta=beta,
            symmetric=False,
            window=window,
            layout=Layout.BOUNDARY_COLUMN,
        )


class ConstraintKind(str, Enum):
    NONE = "none"
    DIAGONAL = "diagonal"
    HIT_SHIFTED = "hit_shifted"
    PARALLELOGRAM = "parallelogram"


class TieBreak(str, Enum):
    """Passo preferido no retrocesso da geodésica em caso de empate."""
    FROM_I = "from_i"  # de (i-1, j)
    FROM_J = "from_j"  # de (i, j-1)


class Constraint(BaseModel):
    """
    Restrição de caminhos de uma consulta de passagem
    """
    model_config = ConfigDict(frozen=True)

    kind: ConstraintKind = ConstraintKind.NONE
    shift: int = 0
    n: int = 0
    width: float = 0.0

    @classmethod
    def none(cls) -> "Constraint":
        return cls()

    @classmethod
    def diagonal(cls) -> "Constraint":
        return cls(kind=ConstraintKind.DIAGONAL)

    @classmethod
    def hit_shifted(cls, k: int) -> "Constraint":
        return cls(kind=ConstraintKind.HIT_SHIFTED, shift=k)

    @classmethod
    def parallelogram(cls, n: int, ell: float) -> "Constraint":
        return cls(kind=ConstraintKind.PARALLELOGRAM, n=n, width=ell)


class PassageQuery(BaseModel):
    model_config = ConfigDict(frozen=True)

    start: Cell
    end: Cell
    constraint: Constraint = Field(default_factory=Constraint)
    include_start_weight: bool = True
    tie_break: TieBreak = TieBreak.FROM_I


class PassageResult(BaseModel):
    """
    Resultado de uma consulta de passagem.

    value é +inf quando o caminho ótimo atravessa células infinitas; nesse caso
    infinite_cells conta essas células e finite_part guarda a soma das demais.
    """
    model_config = ConfigDict(ser_json_inf_nan="constants")

    value: float
    infinite_cells: int = 0
    finite_part: float = 0.0
    geodesic: Optional[List[Cell]] = None
    argmax_index: Optional[int] = None
    unique: bool = True
    margin: float = math.inf


class LogPartition(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="constants")

    log_z: float
    infinite_cells: int = 0
    start: Cell
    end: Cell
    constraint: Constraint = Field(default_factory=Constraint)


class Algebra(str, Enum):
    SUM_PRODUCT = "sum_product"
    MAX_PLUS = "max_plus"


class TwoLineEnvironment(BaseModel):
    """
    Duas linhas (A, B) e o par derivado (Ahat, Bhat) pela RSK de duas linhas.

    queue_start, quando presente, é a variável de fila estacionária colocada no índice 0.
    """
    a: List[float]
    b: List[float]
    a_hat: List[float]
    b_hat: List[float]
    algebra: Algebra
    queue_start: Optional[float] = None


class IsometryReport(BaseModel):
    max_violation: float
    checked_pairs: int
    tolerance: float
    passed: bool


class SwapCoupling(BaseModel):
    """
    Acoplamento (A, B) -> (C, D) com parâmetros trocados
    """
    kind: WeightKind
    a: List[float]
    b: List[float]
    c: List[float]
    d: List[float]
    queue_start: float
    report: IsometryReport


class StationaryModel(str, Enum):
    EXPONENTIAL_LPP = "exponential_lpp"
    GEOMETRIC_LPP = "geometric_lpp"
    LOG_GAMMA = "log_gamma"


class StationaryMeasureSpec(BaseModel):
    """
    Parâmetros das medidas estacionárias conjuntas R^EL, R^GL e R^LG
    """
    model_config = ConfigDict(frozen=True)

    model: StationaryModel = StationaryModel.EXPONENTIAL_LPP
    alpha: float
    theta: float = 0.5
    slopes: List[float]
    epsilon: float = Field(default=0.0, ge=0.0)

    @model_validator(mode="after")
    def _check_constraints(self) -> "StationaryMeasureSpec":
        if not self.slopes:
            raise ValueError("É preciso ao menos uma inclinação")
        s = self.slopes
        if self.model == StationaryModel.GEOMETRIC_LPP:
            if not 0.0 < self.theta < min(1.0 / self.alpha, 1.0):
                raise ValueError("Geometric: requer 0 < theta < min(1/alpha, 1)")
            if any(s[i] <= s[i + 1] for i in range(len(s) - 1)):
                raise ValueError("Geometric: inclinações devem ser estritamente decrescentes")
            if not (s[0] < 1.0 / self.theta and s[-1] >= max(self.alpha, 1.0)):
                raise ValueError("Geometric: requer 1/theta > gamma_1 e gamma_k >= max(alpha, 1)")
            if self.epsilon >= 1.0:
                raise ValueError("Geometric: epsilon deve ser < 1")
        else:
            if self.theta <= max(0.0, -self.alpha):
                raise ValueError("Requer theta > max(0, -alpha)")
            if any(s[i] >= s[i + 1] for i in range(len(s) - 1)):
                raise ValueError("Inclinações devem ser estritamente crescentes")
            if not (s[0] > -self.theta and s[-1] <= min(0.0, self.alpha)):
                raise ValueError("Requer -theta < gamma_1 e gamma_k <= min(0, alpha)")
        return self

    @property
    def k(self) -> int:
        return len(self.slopes)

    def partner(self, i: int) -> float:
        """Parâmetro da linha 2k+1-i acoplada à linha i (1 <= i <= k)."""
        g = self.slopes[i - 1]
        if self.model == StationaryModel.GEOMETRIC_LPP:
            return (1.0 - self.epsilon) / g
        return self.epsilon - g

    def weight_kind(self) -> WeightKind:
        return {
            StationaryModel.EXPONENTIAL_LPP: WeightKind.EXPONENTIAL,
            StationaryModel.GEOMETRIC_LPP: WeightKind.GEOMETRIC,
            StationaryModel.LOG_GAMMA: WeightKind.LOG_GAMMA,
        }[self.model]


class HorizonSample(BaseModel):
    """
    Amostra das marginais de um horizonte: processes[i][p] = R_{i+1}(xs[p])
    """
    model_config = ConfigDict(ser_json_inf_nan="constants")

    slopes: List[float]
    xs: List[float]
    processes: List[List[float]]
    log_scale: bool = False

    def value(self, i: int, x: float) -> float:
        return self.processes[i - 1][self.xs.index(x)]


class MCConfig(BaseModel):
    replicas: int = Field(default=2000, ge=1)
    seed: int = 20240601
    workers: int = Field(default=4, ge=1)
    batch_size: int = Field(default=64, ge=1)
    show_progress: bool = False
    params: Dict[str, Any] = Field(default_factory=dict)


class KSReport(BaseModel):
    """
    Resultado de uma verificação (KS, identidade exata, regressão ou envelope)
    """
    model_config = ConfigDict(ser_json_inf_nan="constants")

    label: str
    kind: str = "two-sample"
    statistic: float
    threshold: float
    passed: bool
    n: int = 0


class SuiteReport(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="constants")

    suite: str
    checks: List[KSReport]
    seed: int
    replicas: int
    elapsed_s: float = 0.0
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.error is None and all(c.passed for c in self.checks)


class CliConfig(BaseModel):
    subcommand: str
    seed: int
    out: Optional[str] = None
    fmt: str = "json"
    replicas: int = 2000
    workers: int = 4
    params: Dict[str, Any] = Field(default_factory=dict)


class HeightFunction(BaseModel):
    """
    Função altura de TASEP em SRW+ sobre os sítios 0..len(values)-1

    right_slope define a extensão à direita da janela: +1 ou -1 (linear), 0 (alternada)
    ou None (sem extensão).
    """
    model_config = ConfigDict(frozen=True)

    values: List[int]
    right_slope: Optional[int] = 1

    @model_validator(mode="after")
    def _check_srw(self) -> "HeightFunction":
        if not self.values:
            raise ValueError("A função altura precisa de ao menos um sítio")
        if self.values[0] % 2 != 0:
            raise ValueError("h(0) deve ser par")
        for i in range(len(self.values) - 1):
            if abs(self.values[i + 1] - self.values[i]) != 1:
                raise ValueError(f"|h({i + 1}) - h({i})| deve ser 1")
        if self.right_slope not in (None, -1, 0, 1):
            raise ValueError("right_slope deve ser -1, 0, 1 ou None")
        return self

    @property
    def width(self) -> int:
        """Último sítio da janela."""
        return len(self.values) - 1

    def __call__(self, x: int) -> int:
        if x < 0:
            raise ValueError(f"Sítio negativo: {x}")
        if x <= self.width:
            return self.values[x]
        if self.right_slope is None:
            raise ValueError(f"h não está definida em {x}")
        last = self.values[-1]
        if self.right_slope == 0:
            if (x - self.width) % 2 == 0:
                return last
            step = self.values[-2] - last if self.width >= 1 else 1
            return last + step
        return last + self.right_slope * (x - self.width)

    @classmethod
    def narrow_wedge(cls, y: int, width: int) -> "HeightFunction":
        """delta_y(x) = |x - y| + 1{y ímpar}."""
        if y < 0 or width < 0:
            raise ValueError("y e width devem ser >= 0")
        return cls(values=[abs(x - y) + (y % 2) for x in range(width + 1)], right_slope=1)

    @classmethod
    def flat(cls, width: int) -> "HeightFunction":
        return cls(values=[x % 2 for x in range(width + 1)], right_slope=0)


class ClockRecord(BaseModel):
    """
    Lista serializável de eventos (tempo, x, a) de um campo de relógios sobre Lambda_d
    """
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(gt=0)
    levels: int = Field(default=1, ge=1)
    horizon: float = Field(ge=0)
    width: int = Field(ge=0)
    events: List[Tuple[float, int, int]] = Field(default_factory=list)


class SpaceTimePoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    x: int = Field(ge=0)
    a: int = Field(ge=0)
    time: float

    @model_validator(mode="after")
    def _check_parity(self) -> "SpaceTimePoint":
        if (self.x + self.a) % 2 != 0:
            raise ValueError(f"Vértice ({self.x}, {self.a}) com x + a ímpar")
        return self

    @property
    def vertex(self) -> Tuple[int, int]:
        return (self.x, self.a)
