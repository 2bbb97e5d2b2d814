// Single bus, one generator at 10 $/MWh, one user with f(x) = (x - 8)^2.
// Prices start at 5 and approach the marginal cost; demand settles at 3 MW.

#include "gridprice/gridprice.hpp"

#include <iomanip>
#include <iostream>

int main() {
    using namespace gridprice;

    GridCase grid;
    grid.num_buses = 1;
    grid.generators.push_back({0, 10.0, std::nullopt});
    grid.users.push_back({0, 8.0, 1.0});

    const DispatchModel model(grid);
    const auto users = users_from_case(grid);

    RunConfig cfg;
    cfg.record_every = 50;
    const Trajectory traj = run(model, users, PriceProfile{5.0}, cfg);
    const auto v = lyapunov_series(traj);

    std::cout << std::setw(6) << "k" << std::setw(14) << "price" << std::setw(14) << "demand" << std::setw(14) << "V\n";
    for (std::size_t r = 0; r < traj.records.size(); ++r) {
        const auto& rec = traj.records[r];
        std::cout << std::setw(6) << rec.k << std::setw(14) << rec.p[0] << std::setw(14) << rec.x[0] << std::setw(14) << v[r]
                  << '\n';
    }
    std::cout << "status: " << to_string(traj.status) << " after " << traj.iterations << " steps\n";
    return traj.status == RunStatus::Converged ? 0 : 1;
}
