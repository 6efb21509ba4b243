import itertools
import math

import numpy as np
import pytest

from config import SamplerConfig, SpectralConfig
from datamanager import (
    AnnealSchedule, AnsatzKind, HelmholtzProblem, LinearSystem, QuboProblem,
    Sample, SampleSet, ScenarioConfig, TrigPolynomial
)
from exceptions import (
    CapacityError, PipelineError, ReferenceEnergyError, ScenarioNotFoundError,
    ValidationError
)
from services.sampler_service import index_to_bits


class TestProblemService:
    """Test closed-form solution functionality"""

    def test_exact_solution_homogeneous(self, problem_service, scenario_service):
        """Test exp1 reduces to u = cos(x) / 2"""
        solution = problem_service.exact_solution(scenario_service.get_scenario('exp1'))

        assert solution.c1 == pytest.approx(0.5)
        assert solution.c2 == pytest.approx(0.0)
        assert solution.particular.terms == ()
        assert solution.secular == ()

    def test_exact_solution_monochromatic(self, problem_service, scenario_service):
        """Test exp2 reduces to u = (cos x - cos 2x) / 2"""
        solution = problem_service.exact_solution(scenario_service.get_scenario('exp2'))
        x = np.linspace(0.0, 2.0 * math.pi, 50)

        expected = 0.5 * (np.cos(x) - np.cos(2.0 * x))
        np.testing.assert_allclose(problem_service.eval_exact(solution, x), expected, atol=1e-14)

    def test_exact_solution_higher_frequency(self, problem_service, scenario_service):
        """Test exp3 reduces to u = (cos 4x + sin 2x) / 2"""
        solution = problem_service.exact_solution(scenario_service.get_scenario('exp3'))
        x = np.linspace(0.0, 2.0 * math.pi, 50)

        expected = 0.5 * (np.cos(4.0 * x) + np.sin(2.0 * x))
        np.testing.assert_allclose(problem_service.eval_exact(solution, x), expected, atol=1e-14)

    def test_exact_solution_polychromatic(self, problem_service, scenario_service):
        """Test exp4 matches its quarter-amplitude closed form"""
        solution = problem_service.exact_solution(scenario_service.get_scenario('exp4'))
        x = np.linspace(0.0, 2.0 * math.pi, 50)

        expected = 0.25 * (-np.cos(x) - np.cos(3 * x) + np.cos(4 * x)
                           + np.sin(x) + np.sin(2 * x) - np.sin(3 * x))
        np.testing.assert_allclose(problem_service.eval_exact(solution, x), expected, atol=1e-14)

    def test_exact_solution_irrational_boundary(self, problem_service, scenario_service):
        """Test exp5 keeps the irrational amplitude"""
        solution = problem_service.exact_solution(scenario_service.get_scenario('exp5'))
        assert solution.c1 == pytest.approx(math.sqrt(2.0) / 2.0)

    def test_exact_solution_random_problems(self, problem_service):
        """Test residual and boundary data vanish for random problems, resonant ones included"""
        rng = np.random.default_rng(7)
        x = np.linspace(0.0, 2.0 * math.pi, 1000)
        resonant = 0

        for _ in range(200):
            tau = float(rng.integers(1, 4))
            frequencies = rng.choice(np.arange(0, 9), size=3, replace=False)
            terms = tuple((int(k), float(rng.uniform(-2, 2)), 0.0 if k == 0 else float(rng.uniform(-2, 2)))
                          for k in frequencies)
            problem = HelmholtzProblem(tau=tau, alpha=float(rng.uniform(-2, 2)),
                                       beta=float(rng.uniform(-2, 2)), driving=TrigPolynomial(terms))
            solution = problem_service.exact_solution(problem)
            resonant += bool(solution.secular)

            assert np.abs(problem_service.residual(problem, solution, x)).max() < 1e-10
            assert problem_service.eval_exact(solution, 0.0) == pytest.approx(problem.alpha, abs=1e-12)
            assert problem_service.eval_exact(solution, 0.0, order=1) == pytest.approx(problem.beta, abs=1e-12)

        assert resonant > 0

    def test_eval_driving(self, problem_service, scenario_service):
        """Test the polychromatic driving at x = 0"""
        driving = scenario_service.get_scenario('exp4').driving
        assert problem_service.eval_driving(driving, 0.0) == pytest.approx(-1.75)

    def test_exact_solution_resonant(self, problem_service, resonant_problem):
        """Test a driving term at k = tau produces the secular x sin(x) / 2 solution"""
        solution = problem_service.exact_solution(resonant_problem)
        x = np.linspace(0.0, 2.0 * math.pi, 50)

        assert len(solution.secular) == 1
        np.testing.assert_allclose(problem_service.eval_exact(solution, x), 0.5 * x * np.sin(x), atol=1e-14)
        assert np.abs(problem_service.residual(resonant_problem, solution, x)).max() < 1e-12

    def test_eval_exact_invalid_order(self, problem_service, scenario_service):
        """Test derivative orders above two are rejected"""
        solution = problem_service.exact_solution(scenario_service.get_scenario('exp1'))

        with pytest.raises(ValidationError) as exc_info:
            problem_service.eval_exact(solution, 0.0, order=3)

        assert 'order' in str(exc_info.value)

    def test_invalid_wave_number(self):
        """Test a nonpositive tau is rejected"""
        with pytest.raises(ValidationError) as exc_info:
            HelmholtzProblem(tau=0.0, alpha=0.0, beta=0.0)

        assert 'positive' in str(exc_info.value)

    def test_driving_parse(self):
        """Test parsing a driving term list"""
        driving = TrigPolynomial.parse('4:-6:0; 2:1.5:0')
        assert driving.terms == ((2, 1.5, 0.0), (4, -6.0, 0.0))

    def test_driving_duplicate_frequency(self):
        """Test a repeated frequency is rejected"""
        with pytest.raises(ValidationError) as exc_info:
            TrigPolynomial(((2, 1.0, 0.0), (2, 0.5, 0.0)))

        assert 'appears twice' in str(exc_info.value)

    def test_driving_non_integer_frequency(self):
        """Test a non-numeric frequency raises a validation error"""
        with pytest.raises(ValidationError) as exc_info:
            TrigPolynomial((('two', 1.0, 0.0),))

        assert 'nonnegative integer' in str(exc_info.value)


class TestAnsatzService:
    """Test basis family functionality"""

    def test_collocation_grid(self, ansatz_service):
        """Test grid points 2 pi m / N"""
        grid = ansatz_service.collocation_grid(4)
        np.testing.assert_allclose(grid.points, [0.0, math.pi / 2, math.pi, 3 * math.pi / 2])

    @pytest.mark.parametrize('N', [0, 3, 7])
    def test_invalid_size(self, ansatz_service, N):
        """Test odd or too small basis sizes are rejected"""
        with pytest.raises(ValidationError) as exc_info:
            ansatz_service.tfa_basis(N)

        assert 'even' in str(exc_info.value)

    @pytest.mark.parametrize('N', ['abc', '4', None, 4.5, True, float('nan')])
    def test_non_integer_size(self, ansatz_service, N):
        """Test non-integer basis sizes raise a validation error"""
        with pytest.raises(ValidationError) as exc_info:
            ansatz_service.collocation_grid(N)

        assert exc_info.value.field == 'N'
        assert 'must be an integer' in str(exc_info.value)

    def test_integral_float_size(self, ansatz_service):
        """Test an integral float is accepted as a basis size"""
        assert len(ansatz_service.collocation_grid(4.0).points) == 4

    def test_tfa_values(self, ansatz_service):
        """Test TFA orders cosines before sines"""
        basis = ansatz_service.tfa_basis(4)
        values = ansatz_service.eval_basis(basis, 0, 0.3)

        np.testing.assert_allclose(values, [math.cos(0.3), math.cos(0.6), math.sin(0.3), math.sin(0.6)],
                                   atol=1e-14)

    def test_tfa_second_derivative(self, ansatz_service):
        """Test (cos 2x)'' = -4 at x = 0"""
        basis = ansatz_service.tfa_basis(4)
        assert ansatz_service.eval_basis(basis, 2, 0.0)[1] == pytest.approx(-4.0)
        np.testing.assert_allclose(ansatz_service.eval_basis(ansatz_service.tfa_basis(2), 2, 0.0),
                                   [-1.0, 0.0], atol=1e-15)

    def test_both_families_represent_cosine(self, ansatz_service):
        """Test cos(x) / 2 is reachable by TFA and CA with N = 2"""
        grid = ansatz_service.collocation_grid(2).points
        tfa = ansatz_service.reconstruct_solution(ansatz_service.tfa_basis(2), [0.5, 0.0], grid)
        ca = ansatz_service.reconstruct_solution(ansatz_service.ca_basis(2), [0.5, -0.5], grid)

        np.testing.assert_allclose(tfa, 0.5 * np.cos(grid), atol=1e-12)
        np.testing.assert_allclose(ca, 0.5 * np.cos(grid), atol=1e-12)

    @pytest.mark.parametrize('N', [2, 4, 8, 10])
    def test_ca_interpolates_grid(self, ansatz_service, N):
        """Test h_n(x_m) is the Kronecker delta"""
        basis = ansatz_service.ca_basis(N)
        grid = ansatz_service.collocation_grid(N).points

        np.testing.assert_allclose(ansatz_service.eval_basis(basis, 0, grid), np.eye(N), atol=1e-12)

    def test_ca_shift_structure(self, ansatz_service):
        """Test every CA function is a shift of the first"""
        N = 6
        basis = ansatz_service.ca_basis(N)
        grid = ansatz_service.collocation_grid(N).points
        x = np.linspace(0.0, 2.0 * math.pi, 37)
        values = ansatz_service.eval_basis(basis, 0, x)

        for n in range(N):
            shifted = ansatz_service.eval_basis(basis, 0, x - grid[n])[:, 0]
            np.testing.assert_allclose(values[:, n], shifted, atol=1e-12)

    @pytest.mark.parametrize('kind', ['tfa', 'ca', 'aa'])
    def test_derivatives_match_finite_differences(self, ansatz_service, kind):
        """Test spectral derivatives against central differences to 1e-5"""
        N = 6
        if kind == 'aa':
            basis = ansatz_service.aa_basis(N, np.random.default_rng(8).normal(size=N * (N + 1)))
        else:
            basis = ansatz_service.build_basis(kind, N)
        x = np.linspace(0.1, 6.0, 13)

        h1 = 1e-6
        first = (ansatz_service.eval_basis(basis, 0, x + h1)
                 - ansatz_service.eval_basis(basis, 0, x - h1)) / (2 * h1)
        np.testing.assert_allclose(ansatz_service.eval_basis(basis, 1, x), first, rtol=0, atol=1e-5)

        h2 = 1e-4
        second = (ansatz_service.eval_basis(basis, 0, x + h2) - 2 * ansatz_service.eval_basis(basis, 0, x)
                  + ansatz_service.eval_basis(basis, 0, x - h2)) / h2 ** 2
        np.testing.assert_allclose(ansatz_service.eval_basis(basis, 2, x), second, rtol=0, atol=1e-5)

    def test_aa_functions_are_real(self, ansatz_service):
        """Test random AA parameters give real-valued functions and derivatives"""
        N = 4
        params = np.random.default_rng(3).normal(size=N * (N + 1))
        basis = ansatz_service.aa_basis(N, params)
        x = np.linspace(0.0, 2.0 * math.pi, 21)

        for order in (0, 1, 2):
            phases = np.exp(1j * np.outer(x, basis.wavenumbers)) * (1j * basis.wavenumbers) ** order
            assert np.abs((phases @ basis.coeffs.T).imag).max() < 1e-12

    def test_aa_row_norm(self, ansatz_service):
        """Test every AA row is scaled to the requested norm"""
        params = np.random.default_rng(4).normal(size=4 * 5)
        basis = ansatz_service.aa_basis(4, params, row_norm=0.25)

        np.testing.assert_allclose(np.linalg.norm(basis.coeffs, axis=1), 0.25)

    def test_aa_reproduces_circulant(self, ansatz_service):
        """Test CA parameters with the CA row norm rebuild the CA basis"""
        N = 6
        ca = ansatz_service.ca_basis(N)
        rebuilt = ansatz_service.aa_basis(N, ansatz_service.basis_to_params(ca),
                                          row_norm=math.sqrt(N - 0.5) / N)

        np.testing.assert_allclose(rebuilt.coeffs, ca.coeffs, atol=1e-15)

    def test_aa_zero_row(self, ansatz_service):
        """Test an all-zero row cannot be normalized"""
        params = np.ones(2 * 3)
        params[:3] = 0.0

        with pytest.raises(ValidationError) as exc_info:
            ansatz_service.aa_basis(2, params)

        assert 'all zero' in str(exc_info.value)

    def test_aa_wrong_parameter_count(self, ansatz_service):
        """Test a parameter vector of the wrong length"""
        with pytest.raises(ValidationError) as exc_info:
            ansatz_service.aa_basis(2, np.ones(5))

        assert 'Expected 6 parameters' in str(exc_info.value)

    def test_aa_requires_parameters(self, ansatz_service):
        """Test building an AA basis without parameters"""
        with pytest.raises(ValidationError):
            ansatz_service.build_basis('aa', 2)

    def test_reconstruct_solution(self, ansatz_service):
        """Test u_N is the weighted sum of the basis"""
        basis = ansatz_service.tfa_basis(2)
        assert ansatz_service.reconstruct_solution(basis, [0.5, -1.0], math.pi / 2) == pytest.approx(-1.0)


class TestEncoderService:
    """Test linear system, binarization and QUBO functionality"""

    def test_assemble_tfa_system(self, encode):
        """Test the exp1 TFA system with N=2"""
        system, _, _ = encode('exp1', 'tfa', 2, 2)

        np.testing.assert_allclose(system.a, [[0, 0], [0, 0], [1, 0], [0, 1]], atol=1e-12)
        np.testing.assert_allclose(system.b, [0, 0, 0.5, 0])

    def test_assemble_ca_system(self, encode):
        """Test the exp1 CA system with N=2"""
        system, _, _ = encode('exp1', 'ca', 2, 2)

        np.testing.assert_allclose(system.a, [[0.5, 0.5], [0.5, 0.5], [1, 0], [0, 0]], atol=1e-12)

    @pytest.mark.parametrize('N', range(2, 22, 2))
    @pytest.mark.parametrize('tau', [0.5, 1.0, 2.5])
    def test_ca_operator_block_is_circulant_for_all_sizes(self, ansatz_service, encoder_service, N, tau):
        """Test the CA collocation block is circulant for every N up to 20"""
        problem = HelmholtzProblem(tau=tau, alpha=0.3, beta=-0.2,
                                   driving=TrigPolynomial(((1, 0.5, 0.0), (3, 0.0, -1.0))))
        system = encoder_service.assemble_system(problem, ansatz_service.ca_basis(N))
        block = np.array(system.a[:N])

        np.testing.assert_allclose(block, np.roll(block, (1, 1), axis=(0, 1)), rtol=0,
                                   atol=1e-10 * max(1.0, np.abs(block).max()))

    @pytest.mark.parametrize('scenario_id,kind,N,expected', [
        ('exp1', 'tfa', 2, 2),
        ('exp1', 'ca', 2, 2),
        ('exp2', 'tfa', 4, 3),
        ('exp2', 'ca', 4, 4),
        ('exp3', 'tfa', 8, 7),
        ('exp3', 'ca', 8, 8),
        ('exp2', 'tfa', 18, 17),
    ])
    def test_matrix_rank(self, encode, encoder_service, scenario_id, kind, N, expected):
        """Test numerical rank of the collocation matrix"""
        system, _, _ = encode(scenario_id, kind, N, 2)
        assert encoder_service.matrix_rank(system.a) == expected

    def test_binarize_system(self, encoder_service):
        """Test the l-major expansion of a one-column system"""
        system = LinearSystem(a=np.array([[1.0]]), b=np.array([1.0]), N=1, tau=1.0,
                              alpha=0.0, beta=0.0, kind=AnsatzKind.TFA)

        np.testing.assert_allclose(encoder_service.binarize_system(system, 2).A, [[-1.0, 0.5]])
        np.testing.assert_allclose(encoder_service.binarize_system(system, 3).A, [[-1.0, 0.5, 0.25]])

    def test_binarize_single_bit(self, encoder_service, encode):
        """Test one bit per weight is rejected"""
        system, _, _ = encode('exp1', 'tfa', 2, 2)

        with pytest.raises(ValidationError) as exc_info:
            encoder_service.binarize_system(system, 1)

        assert 'at least 2' in str(exc_info.value)

    @pytest.mark.parametrize('n_spin', ['two', '3', 2.5, None, False])
    def test_non_integer_bit_depth(self, encoder_service, n_spin):
        """Test non-integer bit depths raise a validation error"""
        with pytest.raises(ValidationError) as exc_info:
            encoder_service.validate_n_spin(n_spin)

        assert exc_info.value.field == 'n_spin'
        assert 'must be an integer' in str(exc_info.value)

    def test_decode_lattice(self, encoder_service):
        """Test three bits cover -1..0.75 in steps of 1/4"""
        weights = sorted(float(encoder_service.decode_bits(bits, 3)[0])
                         for bits in itertools.product((0, 1), repeat=3))

        assert weights == [-1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75]

    def test_decode_is_l_major(self, encoder_service):
        """Test bit l of weight i sits at index l * N + i"""
        weights = encoder_service.decode_bits([0, 1, 1, 0], 2)
        np.testing.assert_allclose(weights, [0.5, -1.0])

    def test_decode_many(self, encoder_service):
        """Test decoding a stack of bitstrings"""
        weights = encoder_service.decode_bits([[0, 0, 1, 0], [1, 1, 1, 1]], 2)
        np.testing.assert_allclose(weights, [[0.5, 0.0], [-0.5, -0.5]])

    def test_decode_length_mismatch(self, encoder_service):
        """Test a bitstring length that is not a multiple of n_spin"""
        with pytest.raises(ValidationError):
            encoder_service.decode_bits([0, 1, 1], 2)

    def test_encode_weights_inverts_decode(self, encoder_service):
        """Test encode_weights recovers the bits of every lattice weight"""
        for bits in itertools.product((0, 1), repeat=6):
            weights = encoder_service.decode_bits(bits, 3)
            assert tuple(encoder_service.encode_weights(weights, 3)) == bits

    def test_qubo_matches_least_squares(self, encoder_service, sampler_service):
        """Test the QUBO energy equals the binarized residual for every bitstring"""
        rng = np.random.default_rng(11)
        system = LinearSystem(a=rng.normal(size=(5, 3)), b=rng.normal(size=5), N=3, tau=1.0,
                              alpha=0.0, beta=0.0, kind=AnsatzKind.TFA)
        binarized = encoder_service.binarize_system(system, 2)
        qubo = encoder_service.build_qubo(binarized)
        bits = index_to_bits(np.arange(1 << qubo.r), qubo.r)

        residual = ((bits @ binarized.A.T - binarized.b) ** 2).sum(axis=1)
        np.testing.assert_allclose(sampler_service.qubo_energy(qubo, bits), residual, atol=1e-10)

    @pytest.mark.parametrize('seed', range(100))
    def test_binarization_is_a_bijection(self, encoder_service, sampler_service, seed):
        """Test bits, lattice weights and QUBO energies correspond one to one"""
        rng = np.random.default_rng(seed)
        N = int(rng.integers(1, 5))
        n_spin = int(rng.integers(2, 5))
        system = LinearSystem(a=rng.normal(size=(N + 2, N)), b=rng.normal(size=N + 2), N=N, tau=1.0,
                              alpha=0.0, beta=0.0, kind=AnsatzKind.TFA)
        binarized = encoder_service.binarize_system(system, n_spin)
        qubo = encoder_service.build_qubo(binarized)
        bits = rng.integers(0, 2, size=(16, N * n_spin))
        weights = np.atleast_2d(encoder_service.decode_bits(bits, n_spin))

        np.testing.assert_allclose(bits @ binarized.A.T, weights @ np.array(system.a).T, atol=1e-12)
        for row, weight in zip(bits, weights):
            np.testing.assert_array_equal(encoder_service.encode_weights(weight, n_spin), row)
        residual = ((weights @ np.array(system.a).T - np.array(system.b)) ** 2).sum(axis=1)
        np.testing.assert_allclose(sampler_service.qubo_energy(qubo, bits), residual, rtol=1e-9, atol=1e-10)

    def test_compact_qubo(self, encoder_service, exp1_qubo):
        """Test the compact exp1 QUBO entries"""
        compact = encoder_service.compact_qubo(exp1_qubo)

        np.testing.assert_allclose(np.diag(compact), [2.0, 1.0, -0.25, 0.25])
        assert compact[0, 2] == pytest.approx(-0.5)
        assert compact[1, 3] == pytest.approx(-0.5)
        assert compact[0, 1] == pytest.approx(0.0)
        assert exp1_qubo.C0 == pytest.approx(0.25)

    def test_to_ising_single_variable(self, encoder_service, single_qubit_qubo):
        """Test the one-variable spin form"""
        ising = encoder_service.to_ising(single_qubit_qubo)

        assert ising.Qtilde[0, 0] == 0.0
        assert ising.Ltilde[0] == pytest.approx(-0.5)
        assert ising.Ctilde0 == pytest.approx(0.5)

    def test_to_ising_coupled_pair(self, encoder_service):
        """Test the two-variable coupling w0 w1 + w1 w0"""
        ising = encoder_service.to_ising(QuboProblem(Q=[[0.0, 1.0], [1.0, 0.0]], L=[0.0, 0.0], C0=0.0))

        np.testing.assert_allclose(ising.Qtilde, [[0.0, 0.25], [0.25, 0.0]])
        np.testing.assert_allclose(ising.Ltilde, [0.5, 0.5])
        assert ising.Ctilde0 == pytest.approx(0.5)

    def test_to_ising_preserves_energies(self, encoder_service, sampler_service):
        """Test QUBO and Ising energies agree under sigma = 2w - 1"""
        rng = np.random.default_rng(5)
        Q = rng.normal(size=(6, 6))
        qubo = QuboProblem(Q=0.5 * (Q + Q.T), L=rng.normal(size=6), C0=1.5)
        ising = encoder_service.to_ising(qubo)
        bits = index_to_bits(np.arange(64), 6)

        assert np.all(np.diag(ising.Qtilde) == 0.0)
        np.testing.assert_allclose(sampler_service.ising_energy(ising, 2.0 * bits - 1.0),
                                   sampler_service.qubo_energy(qubo, bits), atol=1e-10)

    def test_dynamic_range_simple(self, encoder_service):
        """Test log2 of the level spread over the level resolution"""
        assert encoder_service.dynamic_range([[8.0, 0.0], [0.0, 1.0]]) == pytest.approx(3.0)
        assert encoder_service.dynamic_range([[8.0, 0.0], [0.0, -1.0]]) == pytest.approx(math.log2(9.0))

    def test_dynamic_range_ratio_mode(self, encoder_service):
        """Test the plain magnitude ratio ignores signs and repeated levels"""
        matrix = [[8.0, 0.0], [0.0, -1.0]]
        assert encoder_service.dynamic_range(matrix, mode='ratio') == pytest.approx(3.0)

    def test_dynamic_range_unknown_mode(self, encoder_service):
        """Test an unknown mode is rejected"""
        with pytest.raises(ValidationError) as exc_info:
            encoder_service.dynamic_range([[1.0]], mode='bits')

        assert exc_info.value.field == 'mode'

    def test_dynamic_range_merges_round_off(self, encoder_service):
        """Test levels closer than the threshold count once"""
        matrix = [[2.0, 1.0 + 1e-15], [1.0, 1e-14]]
        assert encoder_service.dynamic_range(matrix) == pytest.approx(1.0)

    @pytest.mark.parametrize('n_spin,expected', [(2, 10.0), (3, 40.0), (4, 160.0), (5, 640.0)])
    def test_dynamic_range_grows_with_bits(self, encode, encoder_service, n_spin, expected):
        """Test exp1 TFA dynamic range gains two bits per extra spin"""
        _, _, qubo = encode('exp1', 'tfa', 2, n_spin)
        assert encoder_service.dynamic_range(encoder_service.compact_qubo(qubo)) == pytest.approx(math.log2(expected))

    def test_dynamic_range_circulant(self, encode, encoder_service):
        """Test exp1 CA dynamic range with N=2 and n_spin=2 in both modes"""
        _, _, qubo = encode('exp1', 'ca', 2, 2)
        compact = encoder_service.compact_qubo(qubo)

        assert encoder_service.dynamic_range(compact) == pytest.approx(math.log2(26.0))
        assert encoder_service.dynamic_range(compact, mode='ratio') == pytest.approx(math.log2(20.0))

    # scenario, ansatz, N, n_spin, published DR, how the computed value relates to it
    PUBLISHED_DYNAMIC_RANGES = [
        ('exp1', 'tfa', 2, 2, 3.321, 'match'),
        ('exp1', 'tfa', 2, 3, 5.321, 'match'),
        ('exp1', 'tfa', 2, 4, 7.321, 'match'),
        ('exp1', 'tfa', 2, 5, 9.321, 'match'),
        ('exp1', 'ca', 2, 2, 4.704, 'match'),
        ('exp1', 'ca', 2, 3, 6.704, 'match'),
        ('exp1', 'ca', 2, 4, 8.704, 'match'),
        ('exp1', 'ca', 2, 5, 10.704, 'match'),
        # the same configuration is printed as 8.159 and as 8.189
        ('exp2', 'ca', 4, 2, 8.159, 'match'),
        ('exp2', 'ca', 4, 2, 8.189, 'match'),
        ('exp2', 'ca', 4, 3, 10.189, 'match'),
        # published values above 50 need a resolution near 1e-15, i.e. unmerged round-off
        ('exp2', 'tfa', 4, 2, 54.619, 'round-off'),
        ('exp2', 'tfa', 4, 3, 56.619, 'round-off'),
        ('exp2', 'tfa', 8, 2, 65.796, 'round-off'),
        ('exp2', 'ca', 8, 2, 56.579, 'round-off'),
        ('exp2', 'tfa', 10, 2, 65.077, 'round-off'),
        ('exp2', 'ca', 10, 2, 57.803, 'round-off'),
        ('exp2', 'tfa', 18, 2, 69.398, 'round-off'),
        ('exp2', 'ca', 18, 2, 59.189, 'round-off'),
        ('exp1', 'tfa', 4, 2, 54.923, 'round-off'),
        # log2(144): off-diagonal couplings counted twice, as in the upper-triangular form
        ('exp1', 'ca', 4, 2, 7.169, 'doubled off-diagonals'),
    ]

    @pytest.mark.parametrize('scenario_id,kind,N,n_spin,published,relation', PUBLISHED_DYNAMIC_RANGES)
    def test_dynamic_range_published(self, encode, encoder_service, scenario_id, kind, N, n_spin,
                                     published, relation):
        """Test computed dynamic ranges against published values"""
        _, _, qubo = encode(scenario_id, kind, N, n_spin)
        computed = encoder_service.dynamic_range(encoder_service.compact_qubo(qubo))

        if relation == 'match':
            assert computed == pytest.approx(published, abs=0.05)
        elif relation == 'round-off':
            assert computed < published - 10.0
        else:
            assert computed == pytest.approx(math.log2(104.0))
            assert published == pytest.approx(math.log2(144.0), abs=0.05)

    def test_dynamic_range_zero_matrix(self, encoder_service):
        """Test a matrix without nonzero entries"""
        with pytest.raises(ValidationError) as exc_info:
            encoder_service.dynamic_range(np.zeros((2, 2)))

        assert 'zero threshold' in str(exc_info.value)


class TestSamplerService:
    """Test brute force and simulated annealing functionality"""

    def test_index_to_bits(self):
        """Test index j maps to bits (j >> i) & 1"""
        np.testing.assert_array_equal(index_to_bits([5, 2], 3), [[1, 0, 1], [0, 1, 0]])

    def test_qubo_energy_of_ground_state(self, sampler_service, exp1_qubo):
        """Test the exp1 ground bitstring has zero energy"""
        assert sampler_service.qubo_energy(exp1_qubo, [0, 0, 1, 0]) == pytest.approx(0.0, abs=1e-14)

    def test_qubo_energy_wrong_length(self, sampler_service, exp1_qubo):
        """Test a bitstring of the wrong length"""
        with pytest.raises(ValidationError) as exc_info:
            sampler_service.qubo_energy(exp1_qubo, [0, 1])

        assert 'Expected 4 bits' in str(exc_info.value)

    def test_brute_force_unique_ground_state(self, sampler_service, exp1_qubo):
        """Test brute force on exp1 finds w = (1/2, 0)"""
        result = sampler_service.brute_force(exp1_qubo)

        assert result.ground_energy == pytest.approx(0.0, abs=1e-12)
        assert result.ground_states == ((0, 0, 1, 0),)
        assert result.degeneracy == 1

    def test_brute_force_degenerate(self, sampler_service, encode):
        """Test the rank-deficient exp2 TFA system has two ground states"""
        _, _, qubo = encode('exp2', 'tfa', 4, 2)
        result = sampler_service.brute_force(qubo)

        assert result.degeneracy == 2
        assert result.ground_energy == pytest.approx(0.0, abs=1e-12)

    def test_brute_force_zero_instance(self, sampler_service):
        """Test every bitstring is a ground state of the zero QUBO"""
        result = sampler_service.brute_force(QuboProblem(Q=np.zeros((3, 3)), L=np.zeros(3), C0=0.0))
        assert result.degeneracy == 8

    def test_brute_force_caps_stored_ground_states(self, sampler_service, monkeypatch):
        """Test a flat instance keeps only the first ground states but counts all of them"""
        monkeypatch.setattr(SamplerConfig, 'BRUTE_FORCE_CHUNK', 256)
        monkeypatch.setattr(SamplerConfig, 'MAX_GROUND_STATES', 10)
        result = sampler_service.brute_force(QuboProblem(Q=np.zeros((12, 12)), L=np.zeros(12), C0=0.0))

        assert result.degeneracy == 4096
        assert len(result.ground_states) == 10
        assert result.ground_states == tuple(tuple(int(b) for b in row)
                                             for row in index_to_bits(np.arange(10), 12))

    def test_brute_force_ties_across_chunks(self, sampler_service, monkeypatch):
        """Test ground states spread over several chunks are all found in index order"""
        monkeypatch.setattr(SamplerConfig, 'BRUTE_FORCE_CHUNK', 2)
        result = sampler_service.brute_force(QuboProblem(Q=np.zeros((3, 3)),
                                                         L=np.array([-1.0, 0.0, 0.0]), C0=1.0))

        assert result.ground_energy == pytest.approx(0.0)
        assert result.degeneracy == 4
        assert result.ground_states == ((1, 0, 0), (1, 1, 0), (1, 0, 1), (1, 1, 1))

    def test_simulated_annealing_single_variable(self, sampler_service, single_qubit_qubo):
        """Test every run of a one-variable instance ends at w = 1"""
        samples = sampler_service.simulated_annealing(single_qubit_qubo, n_runs=50)

        assert samples.samples == (Sample((1,), 0.0, 50),)

    def test_brute_force_matches_enumeration(self, sampler_service):
        """Test brute force against a direct minimum on a random instance"""
        rng = np.random.default_rng(9)
        Q = rng.normal(size=(5, 5))
        qubo = QuboProblem(Q=0.5 * (Q + Q.T), L=rng.normal(size=5), C0=0.0)
        energies = sampler_service.qubo_energy(qubo, index_to_bits(np.arange(32), 5))

        assert sampler_service.brute_force(qubo).ground_energy == pytest.approx(energies.min())

    def test_brute_force_capacity(self, sampler_service, exp1_qubo):
        """Test instances above the cap are refused"""
        with pytest.raises(CapacityError) as exc_info:
            sampler_service.brute_force(exp1_qubo, max_qubits=2)

        assert 'simulated annealing' in str(exc_info.value)
        assert exc_info.value.exit_code == 2

    def test_default_schedule(self, sampler_service, exp1_qubo):
        """Test the schedule is scaled to the mean nonzero magnitude"""
        schedule = sampler_service.default_schedule(exp1_qubo)

        assert schedule.beta_start == pytest.approx(0.1 / 0.6875)
        assert schedule.beta_end == pytest.approx(50.0 / 0.6875)
        assert schedule.sweeps == SamplerConfig.DEFAULT_SWEEPS

    def test_simulated_annealing_finds_ground_state(self, sampler_service, exp1_qubo):
        """Test SA reaches the exp1 ground state in almost every run"""
        samples = sampler_service.simulated_annealing(exp1_qubo, n_runs=200, seed=1)
        hits = sum(s.count for s in samples.samples if s.energy <= 1e-9)

        assert sum(s.count for s in samples.samples) == 200
        assert hits / 200 >= 0.9
        assert samples.lowest.bits == (0, 0, 1, 0)

    def test_simulated_annealing_sound(self, sampler_service, encode):
        """Test SA energies are sorted and never below the exact minimum"""
        _, _, qubo = encode('exp4', 'ca', 4, 2)
        ground = sampler_service.brute_force(qubo).ground_energy
        schedule = AnnealSchedule(beta_start=0.1, beta_end=10.0, sweeps=100)
        samples = sampler_service.simulated_annealing(qubo, schedule=schedule, n_runs=50, seed=3)
        energies = [s.energy for s in samples.samples]

        assert energies == sorted(energies)
        assert min(energies) >= ground - 1e-9
        for sample in samples.samples:
            assert sampler_service.qubo_energy(qubo, sample.bits) == pytest.approx(sample.energy)

    def test_simulated_annealing_deterministic(self, sampler_service, exp1_qubo):
        """Test equal seeds give equal samples"""
        schedule = AnnealSchedule(beta_start=0.1, beta_end=5.0, sweeps=20)
        first = sampler_service.simulated_annealing(exp1_qubo, schedule=schedule, n_runs=30, seed=42)
        second = sampler_service.simulated_annealing(exp1_qubo, schedule=schedule, n_runs=30, seed=42)

        assert first.samples == second.samples

    def test_simulated_annealing_invalid_runs(self, sampler_service, exp1_qubo):
        """Test zero runs are rejected"""
        with pytest.raises(ValidationError):
            sampler_service.simulated_annealing(exp1_qubo, n_runs=0)

    @pytest.mark.parametrize('n_runs', ['ten', 2.5, None])
    def test_simulated_annealing_non_integer_runs(self, sampler_service, exp1_qubo, n_runs):
        """Test a non-integer run count raises a validation error"""
        with pytest.raises(ValidationError) as exc_info:
            sampler_service.simulated_annealing(exp1_qubo, n_runs=n_runs)

        assert exc_info.value.field == 'runs'

    def test_success_rate_falls_with_bits(self, sampler_service, experiment_service, encode):
        """Test the exp1 TFA SA success rate does not rise as bits are added"""
        rates = []
        for n_spin in (2, 3, 4, 5):
            _, _, qubo = encode('exp1', 'tfa', 2, n_spin)
            ground = sampler_service.brute_force(qubo).ground_energy
            samples = sampler_service.simulated_annealing(qubo, n_runs=200, seed=7)
            rates.append(experiment_service.success_rate(samples, ground))

        assert rates[0] >= 0.9
        for coarse, fine in zip(rates, rates[1:]):
            assert fine <= coarse + 0.10
        assert rates[-1] < rates[0]

    def test_schedule_validation(self):
        """Test a decreasing inverse temperature ladder is rejected"""
        with pytest.raises(ValidationError) as exc_info:
            AnnealSchedule(beta_start=1.0, beta_end=0.5, sweeps=10)

        assert 'beta_end' in str(exc_info.value)

    @pytest.mark.parametrize('sweeps', ['many', 10.5, None])
    def test_schedule_non_integer_sweeps(self, sweeps):
        """Test a non-integer sweep count raises a validation error"""
        with pytest.raises(ValidationError) as exc_info:
            AnnealSchedule(beta_start=0.1, beta_end=5.0, sweeps=sweeps)

        assert exc_info.value.field == 'sweeps'


class TestScenarioService:
    """Test scenario registry and configuration functionality"""

    def test_builtin_scenarios(self, scenario_service):
        """Test the five built-in scenarios"""
        names = [problem.name for problem in scenario_service.builtin_scenarios()]
        assert names == ['exp1', 'exp2', 'exp3', 'exp4', 'exp5']

    def test_get_scenario_case_insensitive(self, scenario_service):
        """Test scenario ids ignore case"""
        assert scenario_service.get_scenario('EXP3').tau == 2.0

    def test_get_scenario_not_found(self, scenario_service):
        """Test an unknown scenario id"""
        with pytest.raises(ScenarioNotFoundError) as exc_info:
            scenario_service.get_scenario('exp9')

        assert "'exp9' not found" in str(exc_info.value)

    def test_build_config_defaults(self, scenario_service):
        """Test defaults of a minimal configuration"""
        config = scenario_service.build_config({'scenario': 'exp1', 'N': '2'})

        assert config.ansatz == AnsatzKind.TFA
        assert config.N == 2
        assert config.n_spin == 2
        assert config.sampler == 'sa'
        assert config.runs == SamplerConfig.DEFAULT_RUNS
        assert config.gap is True
        assert config.gap_grid == SpectralConfig.GRID_POINTS
        assert config.problem.name == 'exp1'

    def test_build_config_unknown_key(self, scenario_service):
        """Test unknown keys are rejected"""
        with pytest.raises(ValidationError) as exc_info:
            scenario_service.build_config({'scenario': 'exp1', 'n': 2, 'temperature': 3})

        assert 'Unknown keys: temperature' in str(exc_info.value)

    def test_build_config_custom_problem(self, scenario_service):
        """Test a custom problem from tau, alpha, beta and driving"""
        config = scenario_service.build_config({
            'tau': '2', 'alpha': '0.5', 'beta': '1', 'driving': '4:-6:0', 'n': 4
        })

        assert config.scenario == 'custom'
        assert config.problem.tau == 2.0
        assert config.problem.driving.terms == ((4, -6.0, 0.0),)

    def test_build_config_builtin_with_custom_keys(self, scenario_service):
        """Test custom problem keys are refused for built-in scenarios"""
        with pytest.raises(ValidationError) as exc_info:
            scenario_service.build_config({'scenario': 'exp1', 'n': 2, 'tau': 3})

        assert 'only apply to scenario=custom' in str(exc_info.value)

    def test_build_config_odd_size(self, scenario_service):
        """Test an odd basis size"""
        with pytest.raises(ValidationError) as exc_info:
            scenario_service.build_config({'scenario': 'exp1', 'n': 3})

        assert 'even' in str(exc_info.value)

    def test_build_config_single_spin(self, scenario_service):
        """Test a bit depth of one"""
        with pytest.raises(ValidationError) as exc_info:
            scenario_service.build_config({'scenario': 'exp1', 'n': 2, 'n_spin': 1})

        assert 'at least 2' in str(exc_info.value)

    def test_build_config_aa_needs_params(self, scenario_service):
        """Test AA without parameters"""
        with pytest.raises(ValidationError) as exc_info:
            scenario_service.build_config({'scenario': 'exp1', 'n': 2, 'ansatz': 'aa'})

        assert 'aa_params' in str(exc_info.value)

    def test_build_config_inline_aa_params(self, scenario_service):
        """Test AA parameters given as a list"""
        config = scenario_service.build_config({'scenario': 'exp1', 'n': 2, 'ansatz': 'aa',
                                                'aa_params': [1, 0, 0, 0, 1, 0]})

        assert config.aa_params == (1.0, 0.0, 0.0, 0.0, 1.0, 0.0)
        assert config.aa_row_norm == 1.0

    def test_build_config_invalid_bool(self, scenario_service):
        """Test an unparseable boolean"""
        with pytest.raises(ValidationError) as exc_info:
            scenario_service.build_config({'scenario': 'exp1', 'n': 2, 'gap': 'maybe'})

        assert 'true or false' in str(exc_info.value)

    def test_load_config_file(self, scenario_service, tmp_path):
        """Test reading a KEY=VALUE file"""
        path = tmp_path / 'exp3.env'
        path.write_text('SCENARIO=exp3\nANSATZ=ca\nN=8\nN_SPIN=2\nGAP=false\nRUNS=10\n')

        config = scenario_service.load_config(path)

        assert config.scenario == 'exp3'
        assert config.ansatz == AnsatzKind.CA
        assert config.N == 8
        assert config.gap is False
        assert config.runs == 10

    def test_load_config_missing_file(self, scenario_service, tmp_path):
        """Test a config path that does not exist"""
        with pytest.raises(ValidationError) as exc_info:
            scenario_service.load_config(tmp_path / 'missing.env')

        assert 'does not exist' in str(exc_info.value)


class TestExperimentService:
    """Test metrics and experiment orchestration functionality"""

    def test_mse_exact_reconstruction(self, experiment_service, problem_service, scenario_service,
                                      ansatz_service):
        """Test exp2 is reproduced exactly by CA weights u(x_n)"""
        solution = problem_service.exact_solution(scenario_service.get_scenario('exp2'))
        basis = ansatz_service.ca_basis(4)

        assert experiment_service.mse(solution, basis, [0.0, 0.5, -1.0, 0.5]) < 1e-20

    def test_mse_too_few_points(self, experiment_service, problem_service, scenario_service,
                                ansatz_service):
        """Test MSE needs at least two points"""
        solution = problem_service.exact_solution(scenario_service.get_scenario('exp1'))

        with pytest.raises(ValidationError):
            experiment_service.mse(solution, ansatz_service.tfa_basis(2), [0.5, 0.0], n_points=1)

    def test_mse_non_integer_points(self, experiment_service, problem_service, scenario_service,
                                    ansatz_service):
        """Test a non-numeric point count raises a validation error"""
        solution = problem_service.exact_solution(scenario_service.get_scenario('exp1'))

        with pytest.raises(ValidationError) as exc_info:
            experiment_service.mse(solution, ansatz_service.tfa_basis(2), [0.5, 0.0], n_points='100')

        assert exc_info.value.field == 'mse_points'

    def test_success_rate(self, experiment_service):
        """Test the fraction of runs at the ground energy"""
        samples = SampleSet(samples=(Sample((0,), 0.0, 3), Sample((1,), 1.0, 1)), n_runs=4, seed=0)
        assert experiment_service.success_rate(samples, 0.0) == pytest.approx(0.75)

    def test_success_rate_without_reference(self, experiment_service):
        """Test SR needs a reference energy"""
        samples = SampleSet(samples=(Sample((0,), 0.0, 1),), n_runs=1, seed=0)

        with pytest.raises(ReferenceEnergyError):
            experiment_service.success_rate(samples, None)

    def test_run_scenario_homogeneous(self, experiment_service, scenario_service):
        """Test the full pipeline on exp1 TFA with N=2 and n_spin=2"""
        config = scenario_service.build_config({'scenario': 'exp1', 'n': 2, 'n_spin': 2, 'runs': 100})
        report = experiment_service.run_scenario(config)

        assert report.r == 4
        assert report.rank == 2
        assert report.DR == pytest.approx(math.log2(10.0))
        assert report.g_min == pytest.approx(0.19990, rel=0.02)
        assert report.SR_sa >= 0.9
        assert report.MSE_best < 1e-20
        assert report.degeneracy == 1
        assert report.sr_relative is False
        assert {'config', 'basis', 'encode', 'diagnostics', 'brute_force', 'sample', 'gap'} <= set(report.timing)

    @pytest.mark.parametrize('n_spin,expected', [(2, 0.0212321), (3, 0.00091072)])
    def test_run_scenario_irrational_boundary(self, experiment_service, scenario_service,
                                              n_spin, expected):
        """Test exp5 MSE of the best representable weight"""
        config = scenario_service.build_config({'scenario': 'exp5', 'n': 2, 'n_spin': n_spin,
                                                'sampler': 'brute', 'gap': False})
        report = experiment_service.run_scenario(config)

        assert report.MSE_best == pytest.approx(expected, rel=1e-4)
        assert report.SR_sa is None

    @pytest.mark.parametrize('kind', ['tfa', 'ca'])
    def test_run_scenario_exact_representation(self, experiment_service, scenario_service, kind):
        """Test exp2 with N=4 is represented exactly"""
        config = scenario_service.build_config({'scenario': 'exp2', 'ansatz': kind, 'n': 4,
                                                'n_spin': 2, 'sampler': 'brute', 'gap': False})
        report = experiment_service.run_scenario(config)

        assert report.MSE_best < 1e-12

    def test_run_scenario_degenerate_gap(self, experiment_service, scenario_service):
        """Test a degenerate ground manifold is flagged instead of reported as a gap"""
        config = scenario_service.build_config({'scenario': 'exp2', 'ansatz': 'tfa', 'n': 4,
                                                'n_spin': 2, 'sampler': 'brute', 'gap_grid': 21})
        report = experiment_service.run_scenario(config)

        assert report.degeneracy == 2
        assert report.gap_skipped == 'degenerate ground manifold'

    def test_run_scenario_circulant_exact(self, experiment_service, scenario_service,
                                          encoder_service, sampler_service, encode):
        """Test exp3 CA with N=8 recovers the grid values of the exact solution"""
        config = scenario_service.build_config({'scenario': 'exp3', 'ansatz': 'ca', 'n': 8,
                                                'n_spin': 2, 'sampler': 'brute', 'gap': False})
        report = experiment_service.run_scenario(config)
        _, _, qubo = encode('exp3', 'ca', 8, 2)
        ground = sampler_service.brute_force(qubo).ground_states[0]

        assert report.rank == 8
        assert report.MSE_best < 1e-12
        np.testing.assert_allclose(encoder_service.decode_bits(ground, 2),
                                   [0.5, 0.0, 0.5, -1.0, 0.5, 0.0, 0.5, -1.0])

    def test_run_scenario_invalid_spins(self, experiment_service):
        """Test a failing stage is named in the error"""
        config = ScenarioConfig(scenario='exp1', ansatz=AnsatzKind.TFA, N=2, n_spin=1)

        with pytest.raises(PipelineError) as exc_info:
            experiment_service.run_scenario(config)

        assert exc_info.value.stage == 'config'
        assert exc_info.value.exit_code == 2
        assert "stage 'config'" in str(exc_info.value)

    def test_run_scenario_relative_success_rate(self, experiment_service, scenario_service, monkeypatch):
        """Test SR falls back to the best sample above the brute-force cap"""
        monkeypatch.setattr(SamplerConfig, 'BRUTE_FORCE_MAX_QUBITS', 2)
        config = scenario_service.build_config({'scenario': 'exp1', 'n': 2, 'runs': 50, 'gap': False})
        report = experiment_service.run_scenario(config)

        assert report.sr_relative is True
        assert report.MSE_best is None
        assert 0.0 < report.SR_sa <= 1.0

    def test_run_scenario_gap_over_cap(self, experiment_service, scenario_service, monkeypatch):
        """Test g_min is skipped above the spectral cap"""
        monkeypatch.setattr(SpectralConfig, 'MAX_QUBITS', 2)
        config = scenario_service.build_config({'scenario': 'exp1', 'n': 2, 'runs': 20})
        report = experiment_service.run_scenario(config)

        assert report.g_min is None
        assert 'exceeds spectral cap' in report.gap_skipped

    def test_run_sweep(self, experiment_service):
        """Test the sweep covers ansatz x N x n_spin in order"""
        reports = experiment_service.run_sweep('exp1', ['tfa', 'ca'], [2], [2, 3],
                                               runs=20, gap=False)

        assert [(r.ansatz, r.N, r.n_spin) for r in reports] == [
            ('tfa', 2, 2), ('tfa', 2, 3), ('ca', 2, 2), ('ca', 2, 3)
        ]

    def test_emit_report_reproducible(self, experiment_service, scenario_service, tmp_path):
        """Test reruns with equal seeds write byte-identical reports"""
        values = {'scenario': 'exp1', 'n': 2, 'runs': 50, 'seed': 5, 'gap_grid': 21}
        first = experiment_service.emit_report(
            [experiment_service.run_scenario(scenario_service.build_config(values))], tmp_path / 'a.csv')
        second = experiment_service.emit_report(
            [experiment_service.run_scenario(scenario_service.build_config(values))], tmp_path / 'b.csv')

        assert first.read_bytes() == second.read_bytes()

    def test_emit_report_empty(self, experiment_service, tmp_path):
        """Test an empty report list writes the header only"""
        path = experiment_service.emit_report([], tmp_path / 'empty.csv')

        assert path.read_text() == ('scenario,ansatz,N,n_spin,rank,DR,g_min,SR_sa,MSE_sa,MSE_best,'
                                    'r,degeneracy,sr_relative,gap_skipped\n')
