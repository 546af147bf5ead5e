#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "hdiff/error.hpp"
#include "hdiff/identities.hpp"

using namespace hdiff;

TEST(Identities, SpecExamples) {
    IdentityContext ctx(Discretization::build(measures::reflecting_bm()));
    const auto r = verify_identity(ctx, "resolvent-equation", {2.0, 1.0, 0.5, 0.5});
    EXPECT_TRUE(r.pass);
    EXPECT_LE(r.residual, 1e-6);
    EXPECT_EQ(r.params, "q=2 p=1 x=0.5 z=0.5");
    const auto at0 = verify_identity(ctx, "stopped-resolvent-of-h0", {1.0, 0.5, 0.0, 0.0});
    EXPECT_NEAR(at0.lhs, 0.0, 1e-14);
    EXPECT_NEAR(at0.rhs, 0.0, 1e-14);
    EXPECT_THROW(verify_identity(ctx, "no-such-identity", {}), UnknownIdentity);
    EXPECT_THROW(verify_identity(ctx, "resolvent-equation", {1.0, 1.0, 0.5, 0.5}), InputError);
}

TEST(Identities, SuitePassesOnCanonicalMeasures) {
    for (const auto& m : {measures::reflecting_bm(), measures::half_line_bm(), measures::absorbed_bm()}) {
        IdentityContext ctx(Discretization::build(m));
        const auto results = verify_suite(ctx);
        std::map<std::string, double> worst;
        for (const auto& r : results) {
            worst[r.identity] = std::max(worst[r.identity], r.residual);
            EXPECT_TRUE(r.pass) << r.identity << " " << r.params << " lhs=" << r.lhs << " rhs=" << r.rhs;
        }
        EXPECT_EQ(worst.size(), identity_names().size());
    }
}

TEST(Identities, InequalityIsStrictSomewhere) {
    IdentityContext ctx(Discretization::build(measures::half_line_bm()));
    const auto r = verify_identity(ctx, "integral-inequality", {1.0, 0.5, 0.0, 0.0});
    EXPECT_EQ(r.residual, 0.0);
    EXPECT_LT(r.lhs, r.rhs);
}

TEST(Identities, ReportCsv) {
    IdentityContext ctx(Discretization::build(measures::reflecting_bm()));
    const std::vector<IdentityResult> rs{verify_identity(ctx, "excursion-of-h0", {1.0})};
    std::ostringstream out;
    write_identity_report(out, rs);
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "identity,params,lhs,rhs,residual,pass");
    EXPECT_NE(out.str().find("excursion-of-h0,q=1,"), std::string::npos);
}
