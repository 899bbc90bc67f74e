#pragma once

#include <string>
#include <vector>

#include "podinn/errors.hpp"

namespace podinn {

/// Energy-storing subdomains. Each fixes what the coordinate's flow and
/// effort physically are (velocity/force, current/voltage, ...).
enum class Domain {
    MechPotential,  ///< spring displacement
    MechKinetic,    ///< mass momentum
    RotPotential,   ///< angle
    RotKinetic,     ///< angular momentum
    Electric,       ///< capacitor charge
    Magnetic,       ///< inductor flux
    Hydraulic,      ///< tank volume
};

/// Physical kind of a port variable; flow and effort of one port are duals.
enum class PortKind {
    Velocity,
    Force,
    AngularVelocity,
    Torque,
    Current,
    Voltage,
    VolumeFlow,
    Pressure,
};

PortKind dual_kind(PortKind k);
PortKind flow_kind(Domain d);
PortKind effort_kind(Domain d);
const char* to_string(Domain d);
const char* to_string(PortKind k);
Domain domain_from_string(const std::string& s);
PortKind kind_from_string(const std::string& s);

struct StorageCoord {
    std::string name;
    Domain domain;
};

struct ResistivePort {
    std::string name;
    PortKind flow;  ///< effort is the dual kind
};

struct ExternalPort {
    std::string name;
    PortKind effort;  ///< flow (the reaction) is the dual kind
};

/// Ordered storage/resistive/external port spaces over one combined flow
/// basis of dimension n = |S| + |R| + |I|.
struct PortLayout {
    std::vector<StorageCoord> storage;
    std::vector<ResistivePort> resistive;
    std::vector<ExternalPort> external;

    [[nodiscard]] int n_storage() const { return static_cast<int>(storage.size()); }
    [[nodiscard]] int n_resistive() const { return static_cast<int>(resistive.size()); }
    [[nodiscard]] int n_external() const { return static_cast<int>(external.size()); }
    [[nodiscard]] int n_total() const { return n_storage() + n_resistive() + n_external(); }

    [[nodiscard]] int storage_index(int k) const { return k; }
    [[nodiscard]] int resistive_index(int k) const { return n_storage() + k; }
    [[nodiscard]] int external_index(int k) const { return n_storage() + n_resistive() + k; }

    [[nodiscard]] PortKind flow_of(int index) const;
    [[nodiscard]] PortKind effort_of(int index) const;
    [[nodiscard]] const std::string& name_of(int index) const;
    [[nodiscard]] int index_of(const std::string& name) const;

    /// Symmetric boolean matrix over the combined basis marking physically
    /// admissible couplings. An entry couples the effort of one side into the
    /// flow of the other, so kinds must cross-match; gyrator and transformer
    /// pairs are admitted across domains; the resistive-resistive block is
    /// always forbidden (coupling two resistive ports leaves no explicit
    /// evaluation order).
    [[nodiscard]] std::vector<std::vector<bool>> compatibility_mask() const;
};

}  // namespace podinn
