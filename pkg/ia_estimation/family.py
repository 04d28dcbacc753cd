import enum


class Family(enum.StrEnum):
    STUDENT_T = enum.auto()
    GPARETO_ONE_SIDED = enum.auto()
    GPARETO_TWO_SIDED = enum.auto()

    @property
    def is_pareto(self) -> bool:
        return self != Family.STUDENT_T

    @property
    def is_symmetric(self) -> bool:
        return self != Family.GPARETO_ONE_SIDED

    @staticmethod
    def try_parse(value: str | None) -> "Family | None":
        if value is None:
            return None
        normalized = value.strip().lower()
        normalized = _ALIASES.get(normalized, normalized)
        try:
            return Family(normalized)
        except ValueError:
            return None


_ALIASES = {
    "student-t": "student_t",
    "t": "student_t",
    "gpareto-1s": "gpareto_one_sided",
    "gpareto-2s": "gpareto_two_sided",
}


class Sided(enum.StrEnum):
    ONE_SIDED = enum.auto()
    TWO_SIDED = enum.auto()

    @property
    def family(self) -> Family:
        return Family.GPARETO_ONE_SIDED if self == Sided.ONE_SIDED else Family.GPARETO_TWO_SIDED
