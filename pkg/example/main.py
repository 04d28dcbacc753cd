import logging

import prometheus_client as prom

import ia_estimation

logging.basicConfig(level="INFO")


def main() -> None:
    estimator = ia_estimation.setup(runner=ia_estimation.parallel_runner(threads=4))
    for kappa in (0.5, 1.0, 2.0):
        truth = ia_estimation.FamilyParams(family=ia_estimation.Family.STUDENT_T, kappa=kappa)
        samples = ia_estimation.sample(truth, 100_000, seed=1)
        report = estimator.estimate(samples, ia_estimation.Family.STUDENT_T)
        print(f"kappa={kappa}: {report.params} with {report.n2} pairs and {report.n3} triplets")

    print(prom.generate_latest().decode())


if __name__ == "__main__":
    main()
