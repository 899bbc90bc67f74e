#include "podinn/ports.hpp"

#include <algorithm>

namespace podinn {

PortKind dual_kind(PortKind k) {
    switch (k) {
        case PortKind::Velocity: return PortKind::Force;
        case PortKind::Force: return PortKind::Velocity;
        case PortKind::AngularVelocity: return PortKind::Torque;
        case PortKind::Torque: return PortKind::AngularVelocity;
        case PortKind::Current: return PortKind::Voltage;
        case PortKind::Voltage: return PortKind::Current;
        case PortKind::VolumeFlow: return PortKind::Pressure;
        case PortKind::Pressure: return PortKind::VolumeFlow;
    }
    throw std::logic_error("unreachable");
}

PortKind flow_kind(Domain d) {
    switch (d) {
        case Domain::MechPotential: return PortKind::Velocity;
        case Domain::MechKinetic: return PortKind::Force;
        case Domain::RotPotential: return PortKind::AngularVelocity;
        case Domain::RotKinetic: return PortKind::Torque;
        case Domain::Electric: return PortKind::Current;
        case Domain::Magnetic: return PortKind::Voltage;
        case Domain::Hydraulic: return PortKind::VolumeFlow;
    }
    throw std::logic_error("unreachable");
}

PortKind effort_kind(Domain d) { return dual_kind(flow_kind(d)); }

const char* to_string(Domain d) {
    switch (d) {
        case Domain::MechPotential: return "mech-potential";
        case Domain::MechKinetic: return "mech-kinetic";
        case Domain::RotPotential: return "rot-potential";
        case Domain::RotKinetic: return "rot-kinetic";
        case Domain::Electric: return "electric";
        case Domain::Magnetic: return "magnetic";
        case Domain::Hydraulic: return "hydraulic";
    }
    throw std::logic_error("unreachable");
}

const char* to_string(PortKind k) {
    switch (k) {
        case PortKind::Velocity: return "velocity";
        case PortKind::Force: return "force";
        case PortKind::AngularVelocity: return "angular-velocity";
        case PortKind::Torque: return "torque";
        case PortKind::Current: return "current";
        case PortKind::Voltage: return "voltage";
        case PortKind::VolumeFlow: return "volume-flow";
        case PortKind::Pressure: return "pressure";
    }
    throw std::logic_error("unreachable");
}

Domain domain_from_string(const std::string& s) {
    for (Domain d : {Domain::MechPotential, Domain::MechKinetic, Domain::RotPotential,
                     Domain::RotKinetic, Domain::Electric, Domain::Magnetic, Domain::Hydraulic}) {
        if (s == to_string(d)) return d;
    }
    throw SchemaError("unknown domain tag: " + s);
}

PortKind kind_from_string(const std::string& s) {
    for (PortKind k : {PortKind::Velocity, PortKind::Force, PortKind::AngularVelocity,
                       PortKind::Torque, PortKind::Current, PortKind::Voltage,
                       PortKind::VolumeFlow, PortKind::Pressure}) {
        if (s == to_string(k)) return k;
    }
    throw SchemaError("unknown port kind: " + s);
}

PortKind PortLayout::flow_of(int index) const {
    if (index < n_storage()) return flow_kind(storage[index].domain);
    index -= n_storage();
    if (index < n_resistive()) return resistive[index].flow;
    index -= n_resistive();
    return dual_kind(external[index].effort);
}

PortKind PortLayout::effort_of(int index) const { return dual_kind(flow_of(index)); }

const std::string& PortLayout::name_of(int index) const {
    if (index < n_storage()) return storage[index].name;
    index -= n_storage();
    if (index < n_resistive()) return resistive[index].name;
    index -= n_resistive();
    return external[index].name;
}

int PortLayout::index_of(const std::string& name) const {
    for (int i = 0; i < n_total(); ++i) {
        if (name_of(i) == name) return i;
    }
    throw std::out_of_range("no port named " + name);
}

namespace {

bool is_gyrator_or_transformer_pair(Domain a, Domain b) {
    auto match = [&](Domain x, Domain y) { return (a == x && b == y) || (a == y && b == x); };
    // DC-motor constant K couples flux with angular momentum; a piston area
    // ratio couples momentum with tank volume.
    return match(Domain::Magnetic, Domain::RotKinetic) ||
           match(Domain::MechKinetic, Domain::Hydraulic);
}

}  // namespace

std::vector<std::vector<bool>> PortLayout::compatibility_mask() const {
    const int n = n_total();
    std::vector<std::vector<bool>> mask(n, std::vector<bool>(n, false));
    const int ns = n_storage();
    const int nr = n_resistive();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const bool both_resistive =
                i >= ns && i < ns + nr && j >= ns && j < ns + nr;
            if (both_resistive) continue;
            bool ok = effort_of(i) == flow_of(j) && effort_of(j) == flow_of(i);
            if (!ok && i < ns && j < ns) {
                ok = is_gyrator_or_transformer_pair(storage[i].domain, storage[j].domain);
            }
            mask[i][j] = ok;
            mask[j][i] = ok;
        }
    }
    return mask;
}

}  // namespace podinn
